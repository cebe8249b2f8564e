#include "waa/randomized.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace waa {

namespace {

constexpr double kMassTolerance = 1e-10;

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw std::invalid_argument("DiscreteMeasure: negative mass");
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.point < b.point; });
  for (Atom& a : atoms) {
    if (a.mass == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().point == a.point) {
      atoms_.back().mass += a.mass;
    } else {
      if (!atoms_.empty() && atoms_.back().point.dim() != a.point.dim())
        throw std::invalid_argument("DiscreteMeasure: atoms of different dimension");
      atoms_.push_back(std::move(a));
    }
  }
  if (atoms_.empty()) throw std::invalid_argument("DiscreteMeasure: no mass");
  const double total = total_mass();
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "DiscreteMeasure: total mass " << total << " is not 1";
    throw std::invalid_argument(os.str());
  }
}

DiscreteMeasure DiscreteMeasure::point_mass(Point p) { return DiscreteMeasure({Atom{std::move(p), 1.0}}); }

double DiscreteMeasure::total_mass() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.mass;
  return total;
}

Point DiscreteMeasure::mean() const {
  std::vector<double> m(dim(), 0.0);
  for (const Atom& a : atoms_)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += a.mass * a.point[i];
  return Point(std::move(m));
}

double expected_loss(const LossFunction& loss, const DiscreteMeasure& measure, const Point& observation) {
  double total = 0.0;
  for (const Atom& a : measure.atoms()) total += a.mass * loss_eval(loss, a.point, observation);
  return total;
}

DiscreteMeasure mixture_measure(std::span<const double> weights, std::span<const DiscreteMeasure> measures) {
  if (weights.size() != measures.size()) throw std::invalid_argument("mixture_measure: length mismatch");
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) throw std::invalid_argument("mixture_measure: negative weight");
    for (const Atom& a : measures[k].atoms()) atoms.push_back({a.point, weights[k] * a.mass});
  }
  return DiscreteMeasure(std::move(atoms));
}

double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  // Both supports are sorted; walk them together.
  double diff = 0.0;
  auto i = a.atoms().begin();
  auto j = b.atoms().begin();
  while (i != a.atoms().end() || j != b.atoms().end()) {
    if (j == b.atoms().end() || (i != a.atoms().end() && i->point < j->point)) {
      diff += i->mass;
      ++i;
    } else if (i == a.atoms().end() || j->point < i->point) {
      diff += j->mass;
      ++j;
    } else {
      diff += std::abs(i->mass - j->mass);
      ++i;
      ++j;
    }
  }
  return 0.5 * diff;
}

// ---------------------------------------------------------------------------

CounterRng CounterRng::split(std::uint64_t stream) const {
  CounterRng child;
  child.key_ = mix(key_ ^ mix(stream + 0x3c6ef372fe94f82bULL));
  return child;
}

std::pair<Point, CounterRng> sample(const DiscreteMeasure& measure, CounterRng rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (const Atom& a : measure.atoms()) {
    cumulative += a.mass;
    if (u < cumulative) return {a.point, rng};
  }
  return {measure.atoms().back().point, rng};
}

// ---------------------------------------------------------------------------

LilMonitor::LilMonitor(double loss_bound) : loss_bound_(loss_bound) {
  if (!(loss_bound > 0.0)) throw std::invalid_argument("LilMonitor: loss bound must be positive");
}

LilMonitor LilMonitor::from_state(double partial_sum, std::size_t rounds, double loss_bound) {
  LilMonitor m(loss_bound);
  m.partial_sum_ = partial_sum;
  m.rounds_ = rounds;
  return m;
}

void LilMonitor::add(double realized_loss, double expected_loss) {
  const double increment = realized_loss - expected_loss;
  if (std::abs(increment) > 2.0 * loss_bound_ * (1.0 + 1e-12))
    throw std::domain_error("LilMonitor: increment exceeds twice the loss bound");
  partial_sum_ += increment;
  ++rounds_;
}

double lil_statistic(const LilMonitor& monitor) {
  const std::size_t n = monitor.rounds();
  if (n < LilMonitor::kMinRounds) throw std::domain_error("lil_statistic: needs at least 16 rounds");
  const double nd = static_cast<double>(n);
  const double L = monitor.loss_bound();
  return std::abs(monitor.partial_sum()) / std::sqrt(2.0 * L * L * nd * std::log(std::log(nd)));
}

DiscreteMeasure randomized_predict(const RandomizedStrategy& d, const History& h) {
  const Point g = strategy_predict(d.base, h);
  if (d.spread == 0.0) return DiscreteMeasure::point_mass(g);
  std::vector<double> lo(g.coords().begin(), g.coords().end());
  std::vector<double> hi = lo;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] -= d.spread;
    hi[i] += d.spread;
  }
  return DiscreteMeasure({Atom{Point(std::move(lo)), 0.5}, Atom{Point(std::move(hi)), 0.5}});
}

}  // namespace waa
