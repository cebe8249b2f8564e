#pragma once

// Experiment runner: run configuration, environments (Reality), the protocol
// driver with its invariant checks, the verification matrix and trace replay.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "waa/core.hpp"
#include "waa/experts.hpp"
#include "waa/randomized.hpp"

namespace waa {

enum class Mode { deterministic, randomized, removal, removal_randomized };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);
inline bool is_randomized(Mode m) { return m == Mode::randomized || m == Mode::removal_randomized; }
inline bool is_removal(Mode m) { return m == Mode::removal || m == Mode::removal_randomized; }

enum class EnvironmentKind { iid_gaussian, ar1, drifting_sine, adversarial_worstcase, escaping };

std::string_view to_string(EnvironmentKind kind);
EnvironmentKind environment_kind_from_string(std::string_view name);

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::iid_gaussian;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  double param(const std::string& name, double fallback) const;
};

enum class PriorRule { geometric, uniform };

struct PoolConfig {
  EnumConfig enumeration;
  std::size_t size = 8;
  PriorRule priors = PriorRule::geometric;
  /// Randomized experts: expert k splits into +-spreads[(k-1) % size].
  std::vector<double> spreads{0.0, 0.25};
};

struct RunConfig {
  SpaceDims dims;
  LossKind loss = LossKind::squared_norm;
  bool convex_in_prediction = true;
  Mode mode = Mode::deterministic;
  CompactBall prediction_region{Point{0.5}, 0.5};
  CompactBall observation_region{Point{0.5}, 0.5};
  PoolConfig pool;
  EnvironmentSpec environment;
  std::size_t horizon = 1000;
  std::uint64_t rng_seed = 1;
  double base_radius = 2.0;
  bool replay_on_restart = false;
  std::optional<double> mutation_fixed_beta;
  double lil_threshold = 1.2;
  std::string trace_path;
  std::string summary_path;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);

LossFunction make_loss(const RunConfig& config);

/// Measures as JSON: [{"point": [..], "mass": m}, ...] in canonical order.
nlohmann::json measure_to_json(const DiscreteMeasure& measure);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------

/// Extreme points of a ball used as the adversary's candidates: the two
/// endpoints in 1-D, c +- r e_i otherwise. Sorted lexicographically.
std::vector<Point> extreme_candidates(const CompactBall& bounds);

/// The candidate maximizing loss_of(y); ties go to the lexicographically
/// smallest candidate.
Point adversarial_next(const std::function<double(const Point&)>& loss_of, const CompactBall& bounds);
Point adversarial_next(const LossFunction& loss, const Point& prediction, const CompactBall& bounds);

/// Reality. Signals and non-adversarial observations are pure functions of
/// (seed, round) plus, for ar1, the previous observation.
class Environment {
 public:
  /// `clamp` projects observations into `region` (bounded modes).
  Environment(EnvironmentSpec spec, SpaceDims dims, CompactBall region, bool clamp);

  Point signal(std::size_t n) const;
  /// `loss_of` evaluates the current prediction's loss at a candidate y;
  /// only the adversarial kind uses it.
  Point observation(std::size_t n, const std::function<double(const Point&)>& loss_of);

  const EnvironmentSpec& spec() const { return spec_; }

 private:
  CounterRng round_stream(std::size_t n, std::uint64_t purpose) const;

  EnvironmentSpec spec_;
  SpaceDims dims_;
  CompactBall region_;
  bool clamp_;
  std::optional<Point> previous_;
};

// ---------------------------------------------------------------------------

/// One CSV row per round.
struct TraceRow {
  std::size_t n = 0;
  std::size_t stage = 0;
  std::size_t stage_round = 0;
  bool stage_change = false;
  double beta = 0.0;
  double own_loss = 0.0;
  double mixture_loss = 0.0;
  double cum_own_loss = 0.0;
  double best_expert_loss = 0.0;
  double lemma9_lhs = 0.0;
  double lemma9_rhs = 0.0;
  double lemma5_excess_best = 0.0;
  double lemma5_bound_best = 0.0;
};

std::string trace_header();
/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
std::string format_row(const TraceRow& row);
std::vector<TraceRow> parse_trace(std::istream& in);

// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = true;
  /// Smallest slack observed (negative means violated). NaN if never evaluated.
  double worst_margin = 0.0;
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::size_t first_failure_round = 0;
};

struct RunSummary {
  Mode mode = Mode::deterministic;
  std::size_t rounds = 0;
  double own_loss = 0.0;
  std::size_t best_expert = 0;
  double best_expert_loss = 0.0;
  double average_regret_vs_best = 0.0;
  double loss_bound = 0.0;
  double max_lemma9_violation = 0.0;
  double lemma5_min_margin = 0.0;
  std::size_t restart_count = 0;
  std::size_t final_stage = 0;
  std::size_t final_stage_rounds = 0;
  std::optional<double> lil_statistic;
  std::optional<double> lil_competitor_max;
  std::vector<CheckResult> checks;
  std::vector<TraceRow> trace;

  bool all_passed() const;
  const CheckResult* check(std::string_view name) const;
};

nlohmann::json summary_to_json(const RunSummary& summary);

/// Runs the protocol for config.horizon rounds and evaluates every enabled
/// check on every round. Does not touch the filesystem.
RunSummary run(const RunConfig& config);

/// run() plus trace/summary files under the output directory (WAA_OUTPUT_DIR
/// or "."). Returns the process exit code: 0 iff every check held.
int run_and_write(const RunConfig& config, std::ostream& log);

std::string write_trace(const RunSummary& summary);

// ---------------------------------------------------------------------------

struct PropertyReport {
  std::string name;
  bool passed = true;
  double worst_margin = 0.0;
  std::size_t cases = 0;
};

struct VerifyReport {
  std::vector<PropertyReport> properties;
  bool all_passed() const;
};

/// Runs the invariant battery over a fixed matrix of seeds and modes derived
/// from the config, plus the standalone mean-comparison and clipping sweeps.
VerifyReport verify_suite(const RunConfig& config);

/// Sampled mean-comparison sweep: `cases` random (q, L, n) triples.
PropertyReport mean_comparison_sweep(std::uint64_t seed, std::size_t cases, std::size_t max_pool = 64,
                                     double max_abs_loss = 100.0);

/// Sampled clip-dominance sweep for one loss kind, deterministic and measure
/// clipping both counted.
PropertyReport clip_dominance_sweep(LossKind kind, std::uint64_t seed, std::size_t cases);

/// Recomputes every check that a trace file alone determines.
std::vector<CheckResult> replay_checks(const std::vector<TraceRow>& rows);

}  // namespace waa
