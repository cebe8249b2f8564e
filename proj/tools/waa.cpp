#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "waa/harness.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::string> mode;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed for the environment and the learner's sampling");
    cmd->add_option("--horizon", horizon, "Number of rounds N")->check(CLI::PositiveNumber);
    cmd->add_option("--mode", mode, "deterministic | randomized | removal | removal-randomized");
  }

  waa::RunConfig load(const std::string& path) const {
    waa::RunConfig c = waa::load_config(path);
    if (seed) {
      c.environment.seed = *seed;
      c.rng_seed = *seed;
    }
    if (horizon) c.horizon = *horizon;
    if (mode) c.mode = waa::mode_from_string(*mode);
    c.validate();
    return c;
  }
};

int do_verify(const waa::RunConfig& config) {
  const waa::VerifyReport report = waa::verify_suite(config);
  for (const auto& p : report.properties) {
    std::cout << (p.passed ? "PASS " : "FAIL ") << p.name << " cases=" << p.cases
              << " worst_margin=" << waa::format_double(p.worst_margin) << '\n';
  }
  return report.all_passed() ? 0 : 1;
}

int do_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  const auto rows = waa::parse_trace(in);
  bool ok = true;
  for (const auto& c : waa::replay_checks(rows)) {
    ok = ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " evaluations=" << c.evaluations
              << " failures=" << c.failures << " worst_margin=" << waa::format_double(c.worst_margin);
    if (!c.passed) std::cout << " first_failure_round=" << c.first_failure_round;
    std::cout << '\n';
  }
  std::cout << "rows=" << rows.size() << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak Aggregating Algorithm experiment runner"};
  app.require_subcommand(1);

  std::string run_config, verify_config, trace_path;
  Overrides run_over, verify_over;

  CLI::App* run_cmd = app.add_subcommand("run", "Run one configured experiment and write trace + summary");
  run_cmd->add_option("config", run_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_over.attach(run_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant battery over the seed x mode matrix");
  verify_cmd->add_option("config", verify_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  verify_over.attach(verify_cmd);

  CLI::App* replay_cmd = app.add_subcommand("replay", "Recompute the checks a trace file determines");
  replay_cmd->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return waa::run_and_write(run_over.load(run_config), std::cout);
    if (*verify_cmd) return do_verify(verify_over.load(verify_config));
    if (*replay_cmd) return do_replay(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
