#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "waa/engine.hpp"
#include "waa/harness.hpp"
#include "waa/removal.hpp"

namespace waa {

using nlohmann::json;

namespace {

constexpr double kNormalizationTolerance = 1e-12;

class Checker {
 public:
  explicit Checker(std::string name) { result_.name = std::move(name); }

  /// margin >= 0 means the inequality held (slack already included).
  void record(double margin, std::size_t round) {
    ++result_.evaluations;
    worst_ = std::min(worst_, margin);
    if (!(margin >= 0.0)) {
      if (result_.failures == 0) result_.first_failure_round = round;
      ++result_.failures;
      result_.passed = false;
    }
  }

  CheckResult finish() const {
    CheckResult r = result_;
    r.worst_margin = r.evaluations == 0 ? std::numeric_limits<double>::quiet_NaN() : worst_;
    return r;
  }

 private:
  CheckResult result_;
  double worst_ = std::numeric_limits<double>::infinity();
};

/// 0 on bitwise equality, otherwise minus the gap (never zero).
double exact_margin(double got, double want) {
  if (got == want) return 0.0;
  return -std::max(std::abs(got - want), std::numeric_limits<double>::min());
}

Point project_into(const CompactBall& region, const Point& p) { return region.project(p); }

DiscreteMeasure project_into(const CompactBall& region, const DiscreteMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const Atom& a : mu.atoms()) atoms.push_back({region.project(a.point), a.mass});
  return DiscreteMeasure(std::move(atoms));
}

bool inside_ball(const CompactBall& ball, const Point& p) {
  return ball.distance_to_center(p) <= ball.radius * (1.0 + 1e-12) + 1e-12;
}

bool inside_ball(const CompactBall& ball, const DiscreteMeasure& mu) {
  return std::all_of(mu.atoms().begin(), mu.atoms().end(), [&](const Atom& a) { return inside_ball(ball, a.point); });
}

ExpertPool build_pool(const RunConfig& config) {
  ExpertPool pool = enumerate_pool(config.pool.enumeration, config.pool.size);
  if (config.pool.priors == PriorRule::uniform) pool.priors = uniform_priors(pool.size());
  return pool;
}

// Bounded modes drive a single aggregator; this adapter gives it the same
// shape as RemovalMeta.
template <class P>
class BoundedDriver {
 public:
  BoundedDriver(LossFunction loss, std::vector<ExpertFn<P>> experts, std::vector<double> priors, LearningRate rate,
                double loss_bound)
      : agg_(std::move(loss), std::move(experts), std::move(priors), rate), bound_(loss_bound) {}

  const P& predict(const Point& signal) {
    sigma_ = sigma_ ? history_extend(*sigma_, last_observation_, signal) : History::start(signal);
    return agg_.begin_round(*sigma_);
  }

  const MetaRoundReport<P>& observe(const Point& y) {
    report_ = MetaRoundReport<P>{};
    report_.inner = agg_.end_round(y);
    report_.stage_round = agg_.rounds_completed();
    report_.stage_loss_bound = bound_;
    last_observation_ = y;
    return report_;
  }

  const WeakAggregator<P>& aggregator() const { return agg_; }
  std::size_t restarts() const { return 0; }
  double stage_loss_bound() const { return bound_; }
  const ClippingSpec* clipping() const { return nullptr; }

 private:
  WeakAggregator<P> agg_;
  double bound_;
  std::optional<History> sigma_;
  Point last_observation_;
  MetaRoundReport<P> report_;
};

template <class P>
class RemovalDriver {
 public:
  RemovalDriver(MetaConfig config, std::vector<ExpertFn<P>> experts, std::vector<double> priors)
      : meta_(std::move(config), std::move(experts), std::move(priors)) {}

  const P& predict(const Point& signal) {
    spec_before_ = meta_.clipping();
    return meta_.predict(signal);
  }
  const MetaRoundReport<P>& observe(const Point& y) { return meta_.observe(y); }

  const WeakAggregator<P>& aggregator() const { return meta_.aggregator(); }
  std::size_t restarts() const { return meta_.restarts(); }
  double stage_loss_bound() const { return meta_.stage_loss_bound(); }
  /// Clipping in force when this round's prediction was made.
  const ClippingSpec* clipping() const { return &spec_before_; }

 private:
  RemovalMeta<P> meta_;
  ClippingSpec spec_before_;
};

double loss_of_prediction(const LossFunction& loss, const Point& p, const Point& y) { return loss_eval(loss, p, y); }
double loss_of_prediction(const LossFunction& loss, const DiscreteMeasure& p, const Point& y) {
  return expected_loss(loss, p, y);
}

struct RunContext {
  const RunConfig& config;
  LossFunction loss;
  LearningRate rate;
  ExpertPool pool;
};

template <class P, class Driver>
RunSummary drive(const RunContext& ctx, Driver& driver, std::vector<std::shared_ptr<P>>* expert_outputs) {
  const RunConfig& config = ctx.config;
  const bool randomized = is_randomized(config.mode);
  const bool removal = is_removal(config.mode);
  const std::size_t pool_size = ctx.pool.size();

  Environment env(config.environment, config.dims, config.observation_region, !removal);

  Checker normalization("normalization");
  Checker beta_schedule("beta_schedule");
  Checker convexity("countable_convexity");
  Checker lemma9("lemma9");
  Checker mean_cmp("mean_comparison");
  Checker lemma5("lemma5");
  Checker clip_range("clip_range");
  Checker lil("lil");

  RunSummary summary;
  summary.mode = config.mode;
  summary.trace.reserve(config.horizon);
  summary.lemma5_min_margin = std::numeric_limits<double>::infinity();

  std::vector<double> total_expert(pool_size, 0.0);
  double total_own = 0.0;

  CounterRng learner_rng = CounterRng(config.rng_seed).split(0);
  std::vector<CounterRng> expert_rngs;
  for (std::size_t k = 0; k < pool_size; ++k) expert_rngs.push_back(CounterRng(config.rng_seed).split(k + 1));
  std::optional<LilMonitor> own_lil;
  std::vector<LilMonitor> expert_lil;
  if (randomized) {
    own_lil.emplace(driver.stage_loss_bound());
    if (expert_outputs) expert_lil.assign(pool_size, LilMonitor(driver.stage_loss_bound()));
  }

  for (std::size_t n = 1; n <= config.horizon; ++n) {
    const Point x = env.signal(n);
    const P& prediction_ref = driver.predict(x);
    const P prediction = prediction_ref;
    const ClippingSpec* spec = driver.clipping();
    const bool clipped_range_ok = spec == nullptr || inside_ball(spec->outer, prediction);

    const Point y = env.observation(n, [&](const Point& cand) { return loss_of_prediction(ctx.loss, prediction, cand); });

    std::optional<Point> realized;
    if constexpr (std::is_same_v<P, DiscreteMeasure>) {
      auto [g, next] = sample(prediction, learner_rng);
      learner_rng = next;
      realized = std::move(g);
    }

    const MetaRoundReport<P>& meta = driver.observe(y);
    const RoundReport<P>& r = meta.inner;
    const std::size_t t = meta.stage_round;

    double weight_sum = 0.0;
    // Exact zeros are positive weights below the double range.
    bool weights_valid = true;
    for (double p : r.normalized_weights) {
      weight_sum += p;
      weights_valid = weights_valid && p >= 0.0 && std::isfinite(p);
    }
    normalization.record(weights_valid ? kNormalizationTolerance - std::abs(weight_sum - 1.0) : -1.0, n);

    if (ctx.rate.is_decaying()) {
      const double expected_beta = std::exp(-1.0 / std::sqrt(static_cast<double>(t)));
      beta_schedule.record(exact_margin(r.beta, expected_beta), n);
    }

    if (config.convex_in_prediction)
      convexity.record(r.mixture_loss + check_slack(r.mixture_loss) - r.own_loss, n);
    lemma9.record(r.lemma9_rhs + check_slack(r.lemma9_rhs) - r.lemma9_lhs, n);
    mean_cmp.record(r.mean_step.rhs + check_slack(r.mean_step.rhs) - r.mean_step.lhs, n);
    if (removal) clip_range.record(clipped_range_ok ? 0.0 : -1.0, n);

    const double bound_l = meta.stage_loss_bound;
    const std::span<const double> priors = ctx.pool.priors;
    const double best_excess = r.cum_own_loss - r.best_expert_loss;
    if (!meta.stage_changed) {
      // Stage-local cumulative losses live in the aggregator that played the
      // round, which is still the current one.
      const auto cum = driver.aggregator().cumulative_losses();
      for (std::size_t k = 0; k < pool_size; ++k) {
        const double bound = lemma5_bound_value(bound_l, priors[k], t);
        const double excess = r.cum_own_loss - cum[k];
        const double margin = bound + check_slack(bound) - excess;
        lemma5.record(margin, n);
        summary.lemma5_min_margin = std::min(summary.lemma5_min_margin, margin);
      }
    }
    const double best_bound = lemma5_bound_value(bound_l, priors[r.best_expert], t);

    if (randomized) {
      if (meta.stage_changed) {
        own_lil.emplace(driver.stage_loss_bound());
      } else {
        own_lil->add(loss_eval(ctx.loss, *realized, y), r.own_loss);
        if constexpr (std::is_same_v<P, DiscreteMeasure>) {
          if (expert_outputs) {
            for (std::size_t k = 0; k < pool_size; ++k) {
              auto [g, next] = sample(*(*expert_outputs)[k], expert_rngs[k]);
              expert_rngs[k] = next;
              expert_lil[k].add(loss_eval(ctx.loss, g, y), r.per_expert_losses[k]);
            }
          }
        }
      }
    }

    summary.max_lemma9_violation = std::max(summary.max_lemma9_violation, r.lemma9_lhs - r.lemma9_rhs);
    total_own += r.own_loss;
    for (std::size_t k = 0; k < pool_size; ++k) total_expert[k] += r.per_expert_losses[k];

    TraceRow row;
    row.n = n;
    row.stage = meta.stage;
    row.stage_round = t;
    row.stage_change = meta.stage_changed;
    row.beta = r.beta;
    row.own_loss = r.own_loss;
    row.mixture_loss = r.mixture_loss;
    row.cum_own_loss = r.cum_own_loss;
    row.best_expert_loss = r.best_expert_loss;
    row.lemma9_lhs = r.lemma9_lhs;
    row.lemma9_rhs = r.lemma9_rhs;
    row.lemma5_excess_best = best_excess;
    row.lemma5_bound_best = best_bound;
    summary.trace.push_back(row);

    summary.final_stage = removal ? (meta.stage_changed ? meta.stage + 1 : meta.stage) : 0;
    summary.final_stage_rounds = meta.stage_changed ? 0 : t;
  }

  if (randomized && own_lil && own_lil->rounds() >= LilMonitor::kMinRounds) {
    summary.lil_statistic = lil_statistic(*own_lil);
    lil.record(config.lil_threshold - *summary.lil_statistic, config.horizon);
    if (!expert_lil.empty()) {
      double worst = 0.0;
      for (const auto& m : expert_lil) worst = std::max(worst, lil_statistic(m));
      summary.lil_competitor_max = worst;
      lil.record(config.lil_threshold - worst, config.horizon);
    }
  }

  summary.rounds = config.horizon;
  summary.own_loss = total_own;
  summary.best_expert =
      static_cast<std::size_t>(std::min_element(total_expert.begin(), total_expert.end()) - total_expert.begin());
  summary.best_expert_loss = total_expert[summary.best_expert];
  summary.average_regret_vs_best = (total_own - summary.best_expert_loss) / static_cast<double>(config.horizon);
  summary.loss_bound = driver.stage_loss_bound();
  summary.restart_count = driver.restarts();
  if (summary.lemma5_min_margin == std::numeric_limits<double>::infinity())
    summary.lemma5_min_margin = std::numeric_limits<double>::quiet_NaN();

  summary.checks.push_back(normalization.finish());
  if (ctx.rate.is_decaying()) summary.checks.push_back(beta_schedule.finish());
  if (config.convex_in_prediction) summary.checks.push_back(convexity.finish());
  summary.checks.push_back(lemma9.finish());
  summary.checks.push_back(mean_cmp.finish());
  summary.checks.push_back(lemma5.finish());
  if (removal) summary.checks.push_back(clip_range.finish());
  if (randomized) summary.checks.push_back(lil.finish());
  return summary;
}

template <class P>
std::vector<ExpertFn<P>> make_experts(const RunContext& ctx, const CompactBall* projection,
                                      std::vector<std::shared_ptr<P>>* outputs) {
  const RunConfig& config = ctx.config;
  std::vector<ExpertFn<P>> experts;
  experts.reserve(ctx.pool.size());
  for (std::size_t k = 0; k < ctx.pool.size(); ++k) {
    const StationaryStrategy& d = ctx.pool.experts[k];
    std::optional<CompactBall> region;
    if (projection) region = *projection;
    std::shared_ptr<P> last;
    if (outputs) {
      last = std::make_shared<P>();
      outputs->push_back(last);
    }
    if constexpr (std::is_same_v<P, Point>) {
      experts.push_back([d, region, last](const History& h) {
        Point g = strategy_predict(d, h);
        if (region) g = project_into(*region, g);
        if (last) *last = g;
        return g;
      });
    } else {
      const RandomizedStrategy rd{d, config.pool.spreads[k % config.pool.spreads.size()]};
      experts.push_back([rd, region, last](const History& h) {
        DiscreteMeasure mu = randomized_predict(rd, h);
        if (region) mu = project_into(*region, mu);
        if (last) *last = mu;
        return mu;
      });
    }
  }
  return experts;
}

template <class P>
RunSummary run_mode(const RunContext& ctx) {
  const RunConfig& config = ctx.config;
  if (!is_removal(config.mode)) {
    std::vector<std::shared_ptr<P>> outputs;
    auto experts = make_experts<P>(ctx, &config.prediction_region, &outputs);
    const double bound = loss_bound_on(ctx.loss, config.prediction_region, config.observation_region);
    BoundedDriver<P> driver(ctx.loss, std::move(experts), ctx.pool.priors, ctx.rate, bound);
    return drive<P>(ctx, driver, &outputs);
  }
  MetaConfig meta;
  meta.loss = ctx.loss;
  meta.base_radius = config.base_radius;
  meta.signal_center = Point::zeros(config.dims.signal);
  meta.observation_center = Point::zeros(config.dims.observation);
  meta.gamma0 = Point::zeros(config.dims.prediction);
  meta.replay_on_restart = config.replay_on_restart;
  meta.rate = ctx.rate;
  RemovalDriver<P> driver(meta, make_experts<P>(ctx, nullptr, nullptr), ctx.pool.priors);
  return drive<P>(ctx, driver, nullptr);
}

}  // namespace

bool RunSummary::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* RunSummary::check(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

RunSummary run(const RunConfig& config) {
  config.validate();
  RunContext ctx{config, make_loss(config),
                 config.mutation_fixed_beta ? LearningRate::fixed_beta(*config.mutation_fixed_beta)
                                            : LearningRate::decaying(),
                 build_pool(config)};
  if (is_randomized(config.mode)) return run_mode<DiscreteMeasure>(ctx);
  return run_mode<Point>(ctx);
}

json summary_to_json(const RunSummary& s) {
  json checks = json::array();
  for (const auto& c : s.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst_margin", c.worst_margin},
                      {"evaluations", c.evaluations},
                      {"failures", c.failures},
                      {"first_failure_round", c.first_failure_round}});
  }
  json j{{"mode", std::string(to_string(s.mode))},
         {"rounds", s.rounds},
         {"own_loss", s.own_loss},
         {"best_expert", s.best_expert},
         {"best_expert_loss", s.best_expert_loss},
         {"average_regret_vs_best", s.average_regret_vs_best},
         {"loss_bound", s.loss_bound},
         {"max_lemma9_violation", s.max_lemma9_violation},
         {"lemma5_min_margin", s.lemma5_min_margin},
         {"restart_count", s.restart_count},
         {"final_stage", s.final_stage},
         {"final_stage_rounds", s.final_stage_rounds},
         {"all_passed", s.all_passed()},
         {"checks", checks}};
  j["lil_statistic"] = s.lil_statistic ? json(*s.lil_statistic) : json(nullptr);
  j["lil_competitor_max"] = s.lil_competitor_max ? json(*s.lil_competitor_max) : json(nullptr);
  return j;
}

std::string write_trace(const RunSummary& summary) {
  std::string out = trace_header();
  out += '\n';
  for (const auto& row : summary.trace) {
    out += format_row(row);
    out += '\n';
  }
  return out;
}

namespace {

std::filesystem::path output_path(const std::string& configured, const char* fallback) {
  const char* env = std::getenv("WAA_OUTPUT_DIR");
  const std::filesystem::path dir = env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
  const std::filesystem::path file = configured.empty() ? std::filesystem::path(fallback) : std::filesystem::path(configured);
  return file.is_absolute() ? file : dir / file;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int run_and_write(const RunConfig& config, std::ostream& log) {
  const RunSummary summary = run(config);
  const auto trace_file = output_path(config.trace_path, "trace.csv");
  const auto summary_file = output_path(config.summary_path, "summary.json");
  write_file(trace_file, write_trace(summary));
  write_file(summary_file, summary_to_json(summary).dump(2) + "\n");
  for (const auto& c : summary.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " evaluations=" << c.evaluations << " failures=" << c.failures
        << " worst_margin=" << format_double(c.worst_margin);
    if (!c.passed) log << " first_failure_round=" << c.first_failure_round;
    log << '\n';
  }
  log << "average_regret_vs_best=" << format_double(summary.average_regret_vs_best)
      << " restarts=" << summary.restart_count;
  if (summary.lil_statistic) log << " lil_statistic=" << format_double(*summary.lil_statistic);
  log << '\n' << "trace: " << trace_file.string() << '\n' << "summary: " << summary_file.string() << '\n';
  return summary.all_passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------

bool VerifyReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyReport& p) { return p.passed; });
}

PropertyReport mean_comparison_sweep(std::uint64_t seed, std::size_t cases, std::size_t max_pool,
                                     double max_abs_loss) {
  PropertyReport report{"mean_comparison_sweep", true, std::numeric_limits<double>::infinity(), 0};
  CounterRng rng(seed);
  std::vector<double> q, cum;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_pool));
    q.assign(k, 0.0);
    cum.assign(k, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      q[i] = 1e-6 + rng.uniform();
      total += q[i];
      cum[i] = max_abs_loss * (2.0 * rng.uniform() - 1.0);
    }
    for (double& v : q) v /= total;
    // n log-uniform over [1, 1e6].
    const std::size_t n = static_cast<std::size_t>(std::floor(std::pow(10.0, 6.0 * rng.uniform())));
    const MeanComparison m = mean_comparison(q, cum, std::max<std::size_t>(n, 1));
    const double margin = m.rhs + check_slack(m.rhs) - m.lhs;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!(margin >= 0.0)) report.passed = false;
    ++report.cases;
  }
  return report;
}

PropertyReport clip_dominance_sweep(LossKind kind, std::uint64_t seed, std::size_t cases) {
  PropertyReport report{"clip_dominance_" + std::string(to_string(kind)), true,
                        std::numeric_limits<double>::infinity(), 0};
  CounterRng rng(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  auto random_point = [&](std::size_t d, double scale) {
    std::vector<double> v(d);
    for (double& x : v) x = uniform(-scale, scale);
    return Point(std::move(v));
  };
  auto record = [&](double ours, double theirs) {
    const double margin = theirs + check_slack(theirs) - ours;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!(margin >= 0.0)) report.passed = false;
    ++report.cases;
  };

  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    const SpaceDims dims{1, d, d};
    const LossFunction loss = LossFunction::builtin(kind, d);
    const BallNorm norm = rng.uniform() < 0.5 ? BallNorm::max : BallNorm::euclidean;
    const CompactBall b(random_point(d, 5.0), std::exp(uniform(std::log(0.1), std::log(20.0))), norm);
    const Point gamma0 = combine(1.0, b.center, 1.0, random_point(d, b.radius));
    const ClippingSpec spec = build_clipping(loss, b, gamma0);

    // A strategy with wide parameters on a short random history.
    const std::size_t memory = static_cast<std::size_t>(rng.uniform() * 3.0);
    const double scale = spec.outer.radius * std::exp(uniform(-2.0, 2.0));
    std::vector<double> params(parameter_count(StrategyFamily::linear_memory, memory, dims, 0));
    for (double& p : params) p = uniform(-scale, scale);
    const StationaryStrategy strategy = linear_strategy(memory, params, dims);
    History h = History::start(random_point(1, 1.0));
    const std::size_t len = static_cast<std::size_t>(rng.uniform() * 4.0);
    for (std::size_t i = 0; i < len; ++i) h = history_extend(h, random_point(d, 2.0), random_point(1, 1.0));

    Point y = b.center;
    {
      std::vector<double> v(b.center.coords().begin(), b.center.coords().end());
      const Point dir = random_point(d, 1.0);
      const double dn = norm == BallNorm::max ? max_distance(dir, Point::zeros(d)) : euclidean_norm(dir);
      const double radial = rng.uniform() < 0.3 ? 1.0 : rng.uniform();
      if (dn > 0.0)
        for (std::size_t i = 0; i < d; ++i) v[i] += b.radius * radial * dir[i] / dn;
      y = b.project(Point(std::move(v)));
    }

    const Point g = strategy_predict(strategy, h);
    record(loss_eval(loss, clip_point(spec, g), y), loss_eval(loss, g, y));

    const std::size_t atoms = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    std::vector<Atom> support;
    double total = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      const double m = 0.05 + rng.uniform();
      total += m;
      support.push_back({combine(1.0, g, 1.0, random_point(d, scale)), m});
    }
    for (Atom& a : support) a.mass /= total;
    const DiscreteMeasure mu(std::move(support));
    record(expected_loss(loss, clip_measure(spec, mu), y), expected_loss(loss, mu, y));
  }
  return report;
}

std::vector<CheckResult> replay_checks(const std::vector<TraceRow>& rows) {
  Checker lemma9("lemma9");
  Checker lemma5("lemma5");
  Checker convexity("countable_convexity");
  Checker cumulative("cumulative_sum");
  Checker beta_schedule("beta_schedule");
  Checker monotone("round_index");

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& r = rows[i];
    monotone.record(r.n == i + 1 ? 0.0 : -1.0, r.n);
    lemma9.record(r.lemma9_rhs + check_slack(r.lemma9_rhs) - r.lemma9_lhs, r.n);
    if (!r.stage_change)
      lemma5.record(r.lemma5_bound_best + check_slack(r.lemma5_bound_best) - r.lemma5_excess_best, r.n);
    convexity.record(r.mixture_loss + check_slack(r.mixture_loss) - r.own_loss, r.n);

    const bool stage_start = i == 0 || rows[i - 1].stage_change;
    if (stage_start) {
      cumulative.record(exact_margin(r.cum_own_loss, r.lemma9_lhs), r.n);
    } else {
      const double expected = rows[i - 1].cum_own_loss + r.own_loss;
      const double margin = exact_margin(r.cum_own_loss, expected);
      cumulative.record(r.stage_round == rows[i - 1].stage_round + 1 ? margin : -1.0, r.n);
    }
    const double beta = std::exp(-1.0 / std::sqrt(static_cast<double>(r.stage_round)));
    beta_schedule.record(exact_margin(r.beta, beta), r.n);
  }
  return {monotone.finish(),  lemma9.finish(),     lemma5.finish(),
          convexity.finish(), cumulative.finish(), beta_schedule.finish()};
}

VerifyReport verify_suite(const RunConfig& config) {
  config.validate();
  VerifyReport report;
  std::map<std::string, PropertyReport> merged;
  std::vector<std::string> order;

  auto absorb = [&](const CheckResult& c) {
    auto it = merged.find(c.name);
    if (it == merged.end()) {
      it = merged.emplace(c.name, PropertyReport{c.name, true, std::numeric_limits<double>::infinity(), 0}).first;
      order.push_back(c.name);
    }
    PropertyReport& p = it->second;
    p.passed = p.passed && c.passed;
    if (c.evaluations > 0) p.worst_margin = std::min(p.worst_margin, c.worst_margin);
    p.cases += c.evaluations;
  };

  constexpr Mode kModes[] = {Mode::deterministic, Mode::randomized, Mode::removal, Mode::removal_randomized};
  for (Mode mode : kModes) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      RunConfig c = config;
      c.mode = mode;
      c.environment.seed = config.environment.seed + s;
      c.rng_seed = config.rng_seed + s;
      if (is_randomized(mode) && c.pool.spreads.empty()) c.pool.spreads = {0.0};
      const RunSummary summary = run(c);
      for (const auto& check : summary.checks) absorb(check);
    }
  }
  for (const auto& name : order) {
    PropertyReport p = merged.at(name);
    if (p.cases == 0) p.worst_margin = std::numeric_limits<double>::quiet_NaN();
    report.properties.push_back(p);
  }
  report.properties.push_back(mean_comparison_sweep(config.rng_seed, 10000));
  report.properties.push_back(clip_dominance_sweep(LossKind::squared_norm, config.rng_seed, 1000));
  report.properties.push_back(clip_dominance_sweep(LossKind::absolute_norm, config.rng_seed, 1000));
  return report;
}

}  // namespace waa
