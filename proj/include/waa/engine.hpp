#pragma once

// The Weak Aggregating Algorithm: exponential weights with learning rate
// 1/sqrt(n), computed in the log domain, with per-round audit quantities for
// the regret inequalities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "waa/core.hpp"
#include "waa/experts.hpp"
#include "waa/randomized.hpp"

namespace waa {

/// Relative-plus-absolute slack used by every inequality check.
inline constexpr double kCheckTolerance = 1e-9;

inline double check_slack(double reference) { return kCheckTolerance * std::max(1.0, std::abs(reference)); }

/// beta_n as a schedule. The default is beta_n = exp(-1/sqrt(n)); a fixed
/// beta exists only to mutation-test the checks.
class LearningRate {
 public:
  static LearningRate decaying() { return LearningRate(); }
  static LearningRate fixed_beta(double beta);

  bool is_decaying() const { return !fixed_.has_value(); }
  double beta(std::size_t n) const;
  /// -ln(beta_n).
  double eta(std::size_t n) const;

 private:
  std::optional<double> fixed_;
};

/// log(sum_k exp(a_k)) with max shift; summed in index order.
double log_sum_exp(std::span<const double> a);

/// Both sides of the generalized-mean comparison
///   log_{beta_n} sum q_k beta_n^{L_k}  <=  log_{beta_{n+1}} sum q_k beta_{n+1}^{L_k}.
struct MeanComparison {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

MeanComparison mean_comparison(std::span<const double> priors, std::span<const double> cumulative, std::size_t n,
                               const LearningRate& rate = LearningRate::decaying());

bool mean_comparison_check(std::span<const double> priors, std::span<const double> cumulative, std::size_t n,
                           const LearningRate& rate = LearningRate::decaying());

/// (L^2 e^L + ln(1/q)) sqrt(N).
double lemma5_bound_value(double loss_bound, double prior, std::size_t rounds);

// ---------------------------------------------------------------------------

inline Point mix_predictions(std::span<const double> weights, std::span<const Point> predictions) {
  std::vector<double> out(predictions.front().dim(), 0.0);
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const Point& p = predictions[k];
    if (p.dim() != out.size()) throw std::invalid_argument("mix_predictions: expert predictions differ in dimension");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * p[i];
  }
  return Point(std::move(out));
}

inline DiscreteMeasure mix_predictions(std::span<const double> weights, std::span<const DiscreteMeasure> predictions) {
  return mixture_measure(weights, predictions);
}

inline double prediction_loss(const LossFunction& loss, const Point& prediction, const Point& observation) {
  return loss_eval(loss, prediction, observation);
}

inline double prediction_loss(const LossFunction& loss, const DiscreteMeasure& prediction, const Point& observation) {
  return expected_loss(loss, prediction, observation);
}

template <class Prediction>
using ExpertFn = std::function<Prediction(const History&)>;

template <class Prediction>
struct RoundReport {
  std::size_t n = 0;
  double beta = 0.0;
  std::vector<double> normalized_weights;
  Prediction prediction{};
  std::vector<double> per_expert_losses;
  double own_loss = 0.0;
  /// sum_k p_k l_k, the right side of the countable-convexity inequality.
  double mixture_loss = 0.0;
  double cum_own_loss = 0.0;
  std::size_t best_expert = 0;
  double best_expert_loss = 0.0;
  double lemma9_lhs = 0.0;
  double lemma9_rhs = 0.0;
  /// Generalized-mean step from round n to n+1.
  MeanComparison mean_step;
};

template <class Prediction>
class WeakAggregator {
 public:
  WeakAggregator(LossFunction loss, std::vector<ExpertFn<Prediction>> experts, std::vector<double> priors,
                 LearningRate rate = LearningRate::decaying())
      : loss_(std::move(loss)), experts_(std::move(experts)), priors_(std::move(priors)), rate_(rate) {
    if (experts_.empty()) throw ProtocolError("WeakAggregator: empty expert pool");
    if (experts_.size() != priors_.size()) throw std::invalid_argument("WeakAggregator: experts/priors length mismatch");
    double total = 0.0;
    for (double q : priors_) {
      if (!(q > 0.0)) throw std::invalid_argument("WeakAggregator: priors must be positive");
      total += q;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("WeakAggregator: priors sum above 1");
    log_priors_.reserve(priors_.size());
    for (double q : priors_) log_priors_.push_back(std::log(q));
    cumulative_.assign(experts_.size(), 0.0);
  }

  /// Re-runs the algorithm over a stored transcript, so the returned state is
  /// exactly the one a run over this pool from round 1 would have reached.
  static WeakAggregator resume(LossFunction loss, std::vector<ExpertFn<Prediction>> experts, std::vector<double> priors,
                               std::span<const TranscriptEntry> transcript,
                               LearningRate rate = LearningRate::decaying()) {
    WeakAggregator agg(std::move(loss), std::move(experts), std::move(priors), rate);
    for (const auto& round : transcript) {
      agg.begin_round(round.history);
      agg.end_round(round.observation);
    }
    return agg;
  }

  /// Mixture prediction for round n = completed rounds + 1.
  const Prediction& begin_round(const History& sigma) {
    if (in_round_) throw ProtocolError("begin_round: previous round not finished");
    const std::size_t n = completed_ + 1;
    const double eta = rate_.eta(n);

    log_p_.resize(experts_.size());
    for (std::size_t k = 0; k < experts_.size(); ++k) log_p_[k] = log_priors_[k] - eta * cumulative_[k];
    // Max shift, then normalize in the linear domain.
    const double shift = *std::max_element(log_p_.begin(), log_p_.end());
    current_ = RoundReport<Prediction>{};
    current_.n = n;
    current_.beta = rate_.beta(n);
    current_.normalized_weights.resize(experts_.size());
    double z = 0.0;
    for (std::size_t k = 0; k < experts_.size(); ++k) {
      log_p_[k] -= shift;
      current_.normalized_weights[k] = std::exp(log_p_[k]);
      z += current_.normalized_weights[k];
    }
    const double log_z = std::log(z);
    for (std::size_t k = 0; k < experts_.size(); ++k) {
      log_p_[k] -= log_z;
      current_.normalized_weights[k] /= z;
    }

    expert_predictions_.clear();
    expert_predictions_.reserve(experts_.size());
    for (const auto& expert : experts_) expert_predictions_.push_back(expert(sigma));
    current_.prediction = mix_predictions(current_.normalized_weights, expert_predictions_);
    sigma_ = sigma;
    in_round_ = true;
    return current_.prediction;
  }

  const RoundReport<Prediction>& end_round(const Point& observation) {
    if (!in_round_) throw ProtocolError("end_round: begin_round was not called");
    if (observation.dim() != loss_.observation_dim())
      throw std::invalid_argument("end_round: observation dimension mismatch");
    const std::size_t n = current_.n;
    const double eta = rate_.eta(n);

    current_.per_expert_losses.resize(experts_.size());
    double mixture = 0.0;
    scratch_.resize(experts_.size());
    for (std::size_t k = 0; k < experts_.size(); ++k) {
      const double l = prediction_loss(loss_, expert_predictions_[k], observation);
      current_.per_expert_losses[k] = l;
      mixture += current_.normalized_weights[k] * l;
      scratch_[k] = log_p_[k] - eta * l;
    }
    current_.own_loss = prediction_loss(loss_, current_.prediction, observation);
    current_.mixture_loss = mixture;

    own_cumulative_ += current_.own_loss;
    for (std::size_t k = 0; k < experts_.size(); ++k) cumulative_[k] += current_.per_expert_losses[k];
    sum_mixture_ += mixture;
    sum_mean_term_ += log_sum_exp(scratch_) / eta;
    completed_ = n;

    current_.cum_own_loss = own_cumulative_;
    current_.best_expert = best_expert();
    current_.best_expert_loss = cumulative_[current_.best_expert];
    current_.lemma9_lhs = own_cumulative_;
    current_.lemma9_rhs = lemma9_rhs();
    current_.mean_step = mean_comparison(priors_, cumulative_, n, rate_);

    transcript_.push_back({sigma_, observation});
    in_round_ = false;
    return current_;
  }

  /// Adds an expert between rounds; its cumulative loss is replayed over the
  /// stored transcript.
  void activate_expert(ExpertFn<Prediction> expert, double prior) {
    if (in_round_) throw ProtocolError("activate_expert: cannot change the pool mid-round");
    if (!(prior > 0.0)) throw std::invalid_argument("activate_expert: prior must be positive");
    double total = prior;
    for (double q : priors_) total += q;
    if (total > 1.0 + 1e-12) throw std::invalid_argument("activate_expert: priors would sum above 1");
    double replayed = 0.0;
    for (const auto& round : transcript_) replayed += prediction_loss(loss_, expert(round.history), round.observation);
    experts_.push_back(std::move(expert));
    priors_.push_back(prior);
    log_priors_.push_back(std::log(prior));
    cumulative_.push_back(replayed);
  }

  std::size_t rounds_completed() const { return completed_; }
  bool in_round() const { return in_round_; }
  std::size_t pool_size() const { return experts_.size(); }
  const LossFunction& loss() const { return loss_; }
  const LearningRate& learning_rate() const { return rate_; }
  std::span<const double> priors() const { return priors_; }
  std::span<const double> cumulative_losses() const { return cumulative_; }
  double own_cumulative_loss() const { return own_cumulative_; }
  const Transcript& transcript() const { return transcript_; }
  const RoundReport<Prediction>& last_report() const { return current_; }

  std::size_t best_expert() const {
    return static_cast<std::size_t>(std::min_element(cumulative_.begin(), cumulative_.end()) - cumulative_.begin());
  }

  /// Right side of the Lemma-9 style bound after the completed rounds.
  double lemma9_rhs() const {
    if (completed_ == 0) return 0.0;
    const double eta = rate_.eta(completed_);
    std::vector<double> terms(experts_.size());
    for (std::size_t k = 0; k < experts_.size(); ++k) terms[k] = log_priors_[k] - eta * cumulative_[k];
    return sum_mixture_ + sum_mean_term_ - log_sum_exp(terms) / eta;
  }

 private:
  LossFunction loss_;
  std::vector<ExpertFn<Prediction>> experts_;
  std::vector<double> priors_;
  std::vector<double> log_priors_;
  LearningRate rate_;

  std::vector<double> cumulative_;
  double own_cumulative_ = 0.0;
  double sum_mixture_ = 0.0;
  double sum_mean_term_ = 0.0;
  std::size_t completed_ = 0;
  Transcript transcript_;

  bool in_round_ = false;
  History sigma_;
  std::vector<double> log_p_;
  std::vector<double> scratch_;
  std::vector<Prediction> expert_predictions_;
  RoundReport<Prediction> current_;
};

extern template class WeakAggregator<Point>;
extern template class WeakAggregator<DiscreteMeasure>;

// ---------------------------------------------------------------------------

struct Lemma9Result {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

template <class Prediction>
Lemma9Result lemma9_check(const WeakAggregator<Prediction>& state) {
  if (state.rounds_completed() == 0) throw ProtocolError("lemma9_check: no completed round");
  Lemma9Result r{state.own_cumulative_loss(), state.lemma9_rhs(), false};
  r.holds = r.lhs <= r.rhs + check_slack(r.rhs);
  return r;
}

struct Lemma5Result {
  double excess = 0.0;
  double bound = 0.0;
  bool holds = false;
};

template <class Prediction>
Lemma5Result lemma5_bound(const WeakAggregator<Prediction>& state, std::size_t expert_index, double loss_bound) {
  if (expert_index >= state.pool_size()) throw std::out_of_range("lemma5_bound: unknown expert index");
  const std::size_t n = state.rounds_completed();
  Lemma5Result r;
  r.excess = n == 0 ? 0.0 : state.own_cumulative_loss() - state.cumulative_losses()[expert_index];
  r.bound = n == 0 ? 0.0 : lemma5_bound_value(loss_bound, state.priors()[expert_index], n);
  r.holds = r.excess <= r.bound + check_slack(r.bound);
  return r;
}

/// (L_N - competitor's replayed loss) / N.
template <class Competitor>
double average_regret(const WeakAggregator<Point>& state, const Competitor& competitor) {
  const std::size_t n = state.rounds_completed();
  if (n == 0) throw ProtocolError("average_regret: no completed round");
  const double theirs = replay_cumulative_loss(competitor, state.transcript(), state.loss());
  return (state.own_cumulative_loss() - theirs) / static_cast<double>(n);
}

double average_regret(const WeakAggregator<Point>& state, const StationaryStrategy& competitor);

}  // namespace waa
