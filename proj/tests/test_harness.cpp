#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "waa/harness.hpp"

using namespace waa;
using nlohmann::json;

namespace {

RunConfig small_config(Mode mode, EnvironmentKind kind, std::size_t horizon = 400) {
  RunConfig c;
  c.mode = mode;
  c.environment.kind = kind;
  c.environment.seed = 3;
  c.horizon = horizon;
  c.pool.size = 6;
  return c;
}

}  // namespace

TEST_CASE("adversarial_next examples") {
  const LossFunction loss = LossFunction::squared_norm(1);
  const CompactBall unit(Point{0.5}, 0.5);
  CHECK(adversarial_next(loss, Point{0.3}, unit) == Point{1.0});
  CHECK(adversarial_next(loss, Point{0.5}, unit) == Point{0.0});
  CHECK(adversarial_next(loss, Point{0.9}, unit) == Point{0.0});
}

TEST_CASE("adversary candidates in two dimensions") {
  const auto c = extreme_candidates(CompactBall(Point{0.0, 0.0}, 1.0));
  REQUIRE(c.size() == 4);
  CHECK(c[0] == Point{-1.0, 0.0});
  CHECK(c[1] == Point{0.0, -1.0});
  CHECK(c[2] == Point{0.0, 1.0});
  CHECK(c[3] == Point{1.0, 0.0});
  // Ties resolve to the lexicographically smallest candidate.
  CHECK(adversarial_next(LossFunction::absolute_norm(2), Point{0.0, 0.0}, CompactBall(Point{0.0, 0.0}, 1.0)) ==
        Point{-1.0, 0.0});
}

TEST_CASE("config parsing, defaults and round trip") {
  const json j = json::parse(R"({
    "spaces": {"signal_dim": 0, "observation_dim": 1},
    "loss": "absolute_norm",
    "mode": "removal-randomized",
    "pool": {"size": 5, "priors": "uniform", "spreads": [0.1],
             "enumeration": {"families": ["linear_memory"], "memory": [1, 1], "max_level": 9}},
    "environment": {"kind": "ar1", "seed": 12, "params": {"coefficient": 0.25}},
    "horizon": 77,
    "rng_seed": 5,
    "removal": {"base_radius": 4, "replay_on_restart": true},
    "mutation": {"fixed_beta": 0.5},
    "output": {"trace": "t.csv"}
  })");
  const RunConfig c = config_from_json(j);
  CHECK(c.dims.signal == 0);
  CHECK(c.loss == LossKind::absolute_norm);
  CHECK(c.mode == Mode::removal_randomized);
  CHECK(c.pool.size == 5);
  CHECK(c.pool.priors == PriorRule::uniform);
  CHECK_FALSE(c.pool.enumeration.constant);
  CHECK(c.pool.enumeration.linear_memory);
  CHECK(c.pool.enumeration.min_memory == 1);
  CHECK(c.environment.kind == EnvironmentKind::ar1);
  CHECK(c.environment.param("coefficient", 0.0) == 0.25);
  CHECK(c.environment.param("missing", 7.0) == 7.0);
  CHECK(c.horizon == 77);
  CHECK(c.base_radius == 4.0);
  CHECK(c.replay_on_restart);
  CHECK(*c.mutation_fixed_beta == 0.5);
  CHECK(c.prediction_region.center == Point{0.5});

  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config_from_json(json{{"horizon", 0}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"pool", {{"size", 0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"mode", "sideways"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"loss", "custom"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"mutation", {{"fixed_beta", 1.5}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"environment", {{"kind", "martian"}}}}), std::invalid_argument);
  CHECK_NOTHROW(config_from_json(json::object()));
}

TEST_CASE("measure JSON round trip") {
  const DiscreteMeasure mu({{Point{0.1, 2.0}, 0.3}, {Point{-1.0, 0.0}, 0.7}});
  const json j = measure_to_json(mu);
  REQUIRE(j.is_array());
  CHECK(j[0]["point"] == json::array({-1.0, 0.0}));
  CHECK(j[0]["mass"] == 0.7);
  CHECK(measure_from_json(json::parse(j.dump())) == mu);
}

TEST_CASE("shortest round-trip doubles") {
  gen::Rng rng(61);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.index(200)) - 100);
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    CHECK(s.size() <= std::string(buf).size());
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.49306869139523984) == "0.49306869139523984");
}

TEST_CASE("trace write/parse round trip") {
  const RunSummary s = run(small_config(Mode::removal, EnvironmentKind::escaping, 120));
  const std::string csv = write_trace(s);
  std::istringstream in(csv);
  const auto rows = parse_trace(in);
  REQUIRE(rows.size() == s.trace.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(format_row(rows[i]) == format_row(s.trace[i]));
  std::istringstream bad("n,beta\n1,0.3\n");
  CHECK_THROWS_AS(parse_trace(bad), std::invalid_argument);
}

TEST_CASE("single expert matching the mean has zero regret") {
  RunConfig c = small_config(Mode::deterministic, EnvironmentKind::iid_gaussian, 500);
  c.pool.size = 1;
  c.environment.params["mean"] = 0.5;
  const RunSummary s = run(c);
  CHECK(s.average_regret_vs_best == 0.0);
  CHECK(s.all_passed());
}

TEST_CASE("two-expert adversarial run keeps every check") {
  RunConfig c = small_config(Mode::deterministic, EnvironmentKind::adversarial_worstcase, 10000);
  c.loss = LossKind::absolute_norm;
  c.pool.size = 2;
  const RunSummary s = run(c);
  REQUIRE(s.check("lemma5") != nullptr);
  CHECK(s.check("lemma5")->passed);
  CHECK(s.check("lemma5")->evaluations == 20000);
  CHECK(s.all_passed());
  CHECK(s.max_lemma9_violation <= 1e-9 * std::max(1.0, s.own_loss));
}

TEST_CASE("escaping environment: restart count follows the stage arithmetic") {
  for (double limit : {50.0, 1000.0, 3.0}) {
    RunConfig c = small_config(Mode::removal, EnvironmentKind::escaping, 300);
    c.base_radius = 2.0;
    c.environment.params = {{"start", 1.0}, {"growth", 2.0}, {"hold", 5.0}, {"limit", limit}};
    const RunSummary s = run(c);
    const std::size_t expected = static_cast<std::size_t>(std::ceil(std::log2(limit / c.base_radius)));
    CHECK(s.restart_count == expected);
    CHECK(s.all_passed());
  }
}

TEST_CASE("environment purity") {
  for (EnvironmentKind kind : {EnvironmentKind::iid_gaussian, EnvironmentKind::ar1, EnvironmentKind::drifting_sine,
                               EnvironmentKind::escaping}) {
    EnvironmentSpec spec;
    spec.kind = kind;
    spec.seed = 77;
    Environment a(spec, SpaceDims{1, 1, 1}, CompactBall(Point{0.5}, 0.5), true);
    Environment b(spec, SpaceDims{1, 1, 1}, CompactBall(Point{0.5}, 0.5), true);
    const auto none = [](const Point&) { return 0.0; };
    for (std::size_t n = 1; n <= 200; ++n) {
      CHECK(a.signal(n) == b.signal(n));
      CHECK(a.observation(n, none) == b.observation(n, none));
    }
  }
}

TEST_CASE("reproducible traces and replay in every mode") {
  for (Mode mode : {Mode::deterministic, Mode::randomized, Mode::removal, Mode::removal_randomized}) {
    for (EnvironmentKind kind : {EnvironmentKind::ar1, EnvironmentKind::adversarial_worstcase}) {
      const RunConfig c = small_config(mode, kind);
      const RunSummary a = run(c), b = run(c);
      CHECK(write_trace(a) == write_trace(b));
      CHECK(a.all_passed());
      for (const auto& check : replay_checks(a.trace)) {
        INFO(check.name);
        CHECK(check.passed);
      }
    }
  }
}

TEST_CASE("replay detects a corrupted trace") {
  const RunSummary s = run(small_config(Mode::deterministic, EnvironmentKind::ar1));
  auto rows = s.trace;
  rows[100].cum_own_loss += 1e-9;
  bool cumulative_failed = false;
  for (const auto& c : replay_checks(rows))
    if (c.name == "cumulative_sum") cumulative_failed = !c.passed;
  CHECK(cumulative_failed);
  rows = s.trace;
  rows[50].lemma9_lhs = rows[50].lemma9_rhs + 1.0;
  bool lemma9_failed = false;
  for (const auto& c : replay_checks(rows))
    if (c.name == "lemma9") lemma9_failed = !c.passed;
  CHECK(lemma9_failed);
}

TEST_CASE("convexity flag is metadata: identical traces") {
  for (Mode mode : {Mode::deterministic, Mode::randomized}) {
    RunConfig on = small_config(mode, EnvironmentKind::drifting_sine);
    RunConfig off = on;
    off.convex_in_prediction = false;
    const RunSummary a = run(on), b = run(off);
    CHECK(write_trace(a) == write_trace(b));
    CHECK(a.check("countable_convexity") != nullptr);
    CHECK(b.check("countable_convexity") == nullptr);
  }
}

TEST_CASE("randomized run reports the LIL statistics") {
  RunConfig c = small_config(Mode::randomized, EnvironmentKind::iid_gaussian, 2000);
  const RunSummary s = run(c);
  REQUIRE(s.lil_statistic.has_value());
  REQUIRE(s.lil_competitor_max.has_value());
  CHECK(*s.lil_statistic >= 0.0);
  CHECK(s.check("lil")->passed);
  const json j = summary_to_json(s);
  CHECK(j.at("lil_statistic").is_number());
  CHECK(j.at("all_passed") == true);
  CHECK(j.at("checks").size() == s.checks.size());
}

TEST_CASE("mutation: a frozen beta breaks the anytime bound") {
  RunConfig c = small_config(Mode::deterministic, EnvironmentKind::adversarial_worstcase, 10000);
  c.loss = LossKind::absolute_norm;
  c.pool.size = 2;
  c.pool.priors = PriorRule::uniform;
  // Constants 1 and 0 against the worst-case adversary.
  c.pool.enumeration.linear_memory = false;
  c.pool.enumeration.nearest_centroid = false;
  c.pool.enumeration.output = {1.0, 1.0};
  c.mutation_fixed_beta = 0.5;
  const RunSummary s = run(c);
  // Each two-round cycle costs 1/6 over either expert.
  CHECK(s.average_regret_vs_best == doctest::Approx(1.0 / 12.0).epsilon(1e-3));
  REQUIRE(s.check("lemma5") != nullptr);
  CHECK_FALSE(s.check("lemma5")->passed);
  CHECK(s.check("lemma9")->passed);
  CHECK_FALSE(s.all_passed());
}

TEST_CASE("verify suite on a short horizon") {
  RunConfig c = small_config(Mode::deterministic, EnvironmentKind::iid_gaussian, 200);
  const VerifyReport r = verify_suite(c);
  for (const auto& p : r.properties) {
    INFO(p.name);
    CHECK(p.passed);
    CHECK(p.cases > 0);
  }
  CHECK(r.all_passed());
}
