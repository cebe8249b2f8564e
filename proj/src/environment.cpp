#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "waa/harness.hpp"

namespace waa {

std::vector<Point> extreme_candidates(const CompactBall& bounds) {
  std::vector<Point> out;
  const std::size_t d = bounds.dim();
  for (std::size_t i = 0; i < d; ++i) {
    for (double sign : {-1.0, 1.0}) {
      std::vector<double> c(bounds.center.coords().begin(), bounds.center.coords().end());
      c[i] += sign * bounds.radius;
      out.emplace_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Point adversarial_next(const std::function<double(const Point&)>& loss_of, const CompactBall& bounds) {
  const std::vector<Point> candidates = extreme_candidates(bounds);
  if (candidates.empty()) return bounds.center;
  std::size_t best = 0;
  double worst_loss = loss_of(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double l = loss_of(candidates[i]);
    if (l > worst_loss) {
      worst_loss = l;
      best = i;
    }
  }
  return candidates[best];
}

Point adversarial_next(const LossFunction& loss, const Point& prediction, const CompactBall& bounds) {
  return adversarial_next([&](const Point& y) { return loss_eval(loss, prediction, y); }, bounds);
}

// ---------------------------------------------------------------------------

namespace {

enum Purpose : std::uint64_t { kSignalStream = 1, kObservationStream = 2 };

}  // namespace

Environment::Environment(EnvironmentSpec spec, SpaceDims dims, CompactBall region, bool clamp)
    : spec_(std::move(spec)), dims_(dims), region_(std::move(region)), clamp_(clamp) {
  if (region_.dim() != dims_.observation) throw std::invalid_argument("Environment: region dimension mismatch");
}

CounterRng Environment::round_stream(std::size_t n, std::uint64_t purpose) const {
  return CounterRng(spec_.seed).split(purpose).split(n);
}

Point Environment::signal(std::size_t n) const {
  std::vector<double> x(dims_.signal, 0.0);
  switch (spec_.kind) {
    case EnvironmentKind::iid_gaussian:
    case EnvironmentKind::ar1: {
      CounterRng rng = round_stream(n, kSignalStream);
      for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
      break;
    }
    case EnvironmentKind::drifting_sine: {
      const double omega = spec_.param("frequency", 0.05);
      if (!x.empty()) x[0] = std::sin(omega * static_cast<double>(n));
      break;
    }
    case EnvironmentKind::adversarial_worstcase:
    case EnvironmentKind::escaping: break;
  }
  return Point(std::move(x));
}

Point Environment::observation(std::size_t n, const std::function<double(const Point&)>& loss_of) {
  const std::size_t d = dims_.observation;
  const Point& c = region_.center;
  CounterRng rng = round_stream(n, kObservationStream);
  std::vector<double> y(d, 0.0);

  switch (spec_.kind) {
    case EnvironmentKind::iid_gaussian: {
      const double sd = spec_.param("stddev", 0.2);
      std::normal_distribution<double> normal(0.0, sd);
      for (std::size_t i = 0; i < d; ++i) y[i] = spec_.param("mean", c[i]) + normal(rng);
      break;
    }
    case EnvironmentKind::ar1: {
      const double a = spec_.param("coefficient", 0.5);
      std::normal_distribution<double> normal(0.0, spec_.param("noise", 0.1));
      for (std::size_t i = 0; i < d; ++i) {
        const double mean = spec_.param("mean", c[i]);
        const double prev = previous_ ? (*previous_)[i] : mean;
        y[i] = mean + a * (prev - mean) + normal(rng);
      }
      break;
    }
    case EnvironmentKind::drifting_sine: {
      const double amp = spec_.param("amplitude", 0.4);
      const double omega = spec_.param("frequency", 0.05);
      const double drift = spec_.param("drift", 1e-3);
      std::normal_distribution<double> normal(0.0, spec_.param("noise", 0.05));
      const double t = static_cast<double>(n);
      for (std::size_t i = 0; i < d; ++i)
        y[i] = spec_.param("mean", c[i]) + amp * std::sin(omega * t + drift * t) + normal(rng);
      break;
    }
    case EnvironmentKind::adversarial_worstcase: {
      previous_ = adversarial_next(loss_of, region_);
      return *previous_;
    }
    case EnvironmentKind::escaping: {
      // start * growth^floor((n-1)/hold) on the first coordinate, capped at
      // limit (or 1e100 when unlimited, keeping squared losses finite).
      const double start = spec_.param("start", 1.0);
      const double growth = spec_.param("growth", 2.0);
      const double hold = std::max(1.0, spec_.param("hold", 10.0));
      const double limit = spec_.param("limit", 0.0);
      double v = start * std::pow(growth, std::floor(static_cast<double>(n - 1) / hold));
      v = std::min(v, limit > 0.0 ? limit : 1e100);
      if (d > 0) y[0] = v;
      break;
    }
  }
  Point out(std::move(y));
  if (clamp_) out = region_.project(out);
  previous_ = out;
  return out;
}

}  // namespace waa
