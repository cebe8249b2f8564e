#pragma once

// Hand-rolled generators for the property tests. Deliberately independent of
// the library's own generator.

#include <cmath>
#include <cstdint>
#include <vector>

#include "waa/core.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed * 0x2545f4914f6cdd1dULL + 1) {}

  std::uint64_t next() {
    // xorshift64*
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  waa::Point point(std::size_t dim, double lo, double hi) {
    std::vector<double> v(dim);
    for (double& x : v) x = uniform(lo, hi);
    return waa::Point(std::move(v));
  }

  /// Uniform direction times `radius`, Euclidean.
  waa::Point on_sphere(const waa::Point& center, double radius) {
    std::vector<double> v(center.dim());
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = uniform(-1.0, 1.0);
        norm += x * x;
      }
    } while (norm < 1e-6 || norm > 1.0);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + radius * v[i] / norm;
    return waa::Point(std::move(v));
  }

  /// Uniform in the Euclidean ball (rejection from the cube).
  waa::Point in_ball(const waa::Point& center, double radius) {
    std::vector<double> v(center.dim());
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = uniform(-1.0, 1.0);
        norm += x * x;
      }
    } while (norm > 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + radius * v[i];
    return waa::Point(std::move(v));
  }

 private:
  std::uint64_t state_;
};

}  // namespace gen
