#pragma once

// Finite-support probability measures as predictions, sampling and
// law-of-the-iterated-logarithm monitors for the randomized game.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "waa/core.hpp"
#include "waa/experts.hpp"

namespace waa {

struct Atom {
  Point point;
  double mass = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// A probability measure with finitely many atoms. Always canonical: support
/// sorted lexicographically, coincident points merged, masses positive and
/// summing to one.
class DiscreteMeasure {
 public:
  /// Point mass on the zero-dimensional point.
  DiscreteMeasure() : atoms_{Atom{Point(), 1.0}} {}

  /// Canonicalizes the atoms. Zero-mass atoms are dropped; negative masses or
  /// a total away from 1 are rejected.
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure point_mass(Point p);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  std::size_t dim() const { return atoms_.front().point.dim(); }
  double total_mass() const;
  Point mean() const;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Sum over atoms of mass * lambda(point, y).
double expected_loss(const LossFunction& loss, const DiscreteMeasure& measure, const Point& observation);

/// sum_k weights[k] * measures[k], canonicalized.
DiscreteMeasure mixture_measure(std::span<const double> weights, std::span<const DiscreteMeasure> measures);

/// Total-variation distance between two measures.
double total_variation(const DiscreteMeasure& a, const DiscreteMeasure& b);

// ---------------------------------------------------------------------------

/// Counter-based generator: the n-th output is a pure function of (key, n).
/// split() derives an independent stream keyed by a stream id, so each
/// consumer of randomness owns its own sequence. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  CounterRng split(std::uint64_t stream) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF draw over the sorted support from one uniform variate.
/// The generator is taken by value and the advanced state returned.
std::pair<Point, CounterRng> sample(const DiscreteMeasure& measure, CounterRng rng);

// ---------------------------------------------------------------------------

/// Tracks sum_n (lambda(g_n, y_n) - expected loss of gamma_n at y_n).
class LilMonitor {
 public:
  static constexpr std::size_t kMinRounds = 16;

  explicit LilMonitor(double loss_bound);

  /// Throws std::domain_error if the increment exceeds 2L in absolute value.
  void add(double realized_loss, double expected_loss);

  double partial_sum() const { return partial_sum_; }
  std::size_t rounds() const { return rounds_; }
  double loss_bound() const { return loss_bound_; }

  static LilMonitor from_state(double partial_sum, std::size_t rounds, double loss_bound);

 private:
  double partial_sum_ = 0.0;
  std::size_t rounds_ = 0;
  double loss_bound_;
};

/// |partial sum| / sqrt(2 L^2 n ln ln n). Throws std::domain_error for n < 16.
double lil_statistic(const LilMonitor& monitor);

// ---------------------------------------------------------------------------

/// A stationary randomized strategy: the deterministic rule's output g split
/// into 0.5 * delta(g - s) + 0.5 * delta(g + s) (a point mass when s = 0).
struct RandomizedStrategy {
  StationaryStrategy base;
  double spread = 0.0;
};

DiscreteMeasure randomized_predict(const RandomizedStrategy& d, const History& h);

}  // namespace waa
