#include "waa/engine.hpp"

namespace waa {

template class WeakAggregator<Point>;
template class WeakAggregator<DiscreteMeasure>;

LearningRate LearningRate::fixed_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("LearningRate: fixed beta must lie in (0, 1)");
  LearningRate r;
  r.fixed_ = beta;
  return r;
}

double LearningRate::beta(std::size_t n) const {
  if (fixed_) return *fixed_;
  return std::exp(-1.0 / std::sqrt(static_cast<double>(n)));
}

double LearningRate::eta(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("LearningRate: rounds start at 1");
  if (fixed_) return -std::log(*fixed_);
  return 1.0 / std::sqrt(static_cast<double>(n));
}

double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

namespace {

// log_beta sum_k q_k beta^{L_k} with beta = exp(-eta).
double generalized_mean(std::span<const double> priors, std::span<const double> cumulative, double eta) {
  std::vector<double> terms(priors.size());
  for (std::size_t k = 0; k < priors.size(); ++k) terms[k] = std::log(priors[k]) - eta * cumulative[k];
  return -log_sum_exp(terms) / eta;
}

}  // namespace

MeanComparison mean_comparison(std::span<const double> priors, std::span<const double> cumulative, std::size_t n,
                               const LearningRate& rate) {
  if (n == 0) throw std::invalid_argument("mean_comparison: n must be >= 1");
  if (priors.size() != cumulative.size() || priors.empty())
    throw std::invalid_argument("mean_comparison: priors and losses must be non-empty and equal length");
  MeanComparison r;
  r.lhs = generalized_mean(priors, cumulative, rate.eta(n));
  r.rhs = generalized_mean(priors, cumulative, rate.eta(n + 1));
  r.holds = r.lhs <= r.rhs + check_slack(r.rhs);
  return r;
}

bool mean_comparison_check(std::span<const double> priors, std::span<const double> cumulative, std::size_t n,
                           const LearningRate& rate) {
  return mean_comparison(priors, cumulative, n, rate).holds;
}

double lemma5_bound_value(double loss_bound, double prior, std::size_t rounds) {
  const double L = loss_bound;
  return (L * L * std::exp(L) + std::log(1.0 / prior)) * std::sqrt(static_cast<double>(rounds));
}

double average_regret(const WeakAggregator<Point>& state, const StationaryStrategy& competitor) {
  return average_regret(state, [&competitor](const History& h) { return strategy_predict(competitor, h); });
}

}  // namespace waa
