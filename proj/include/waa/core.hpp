#pragma once

// Shared vocabulary: points, histories, loss functions and compact balls.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace waa {

/// Raised when an operation is asked for something it cannot do for this
/// input kind (e.g. a sublevel set of a custom loss without an oracle).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a stateful object is driven out of protocol order.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A finite real vector. Every coordinate is finite.
class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::vector<double> coords);

  static Point zeros(std::size_t dim) { return Point(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point& a, const Point& b) { return a.coords_ <=> b.coords_; }

 private:
  std::vector<double> coords_;
};

double euclidean_distance(const Point& a, const Point& b);
double max_distance(const Point& a, const Point& b);
double euclidean_norm(const Point& a);

/// Affine combination a*p + b*q, coordinate-wise.
Point combine(double a, const Point& p, double b, const Point& q);

// ---------------------------------------------------------------------------

enum class BallNorm { euclidean, max };

/// Closed ball {p : ||p - center|| <= radius} in either the Euclidean or the
/// max norm. Max-norm balls are the boxes used by the removal game.
struct CompactBall {
  Point center;
  double radius = 0.0;
  BallNorm norm = BallNorm::euclidean;

  CompactBall() = default;
  CompactBall(Point c, double r, BallNorm n = BallNorm::euclidean);

  std::size_t dim() const { return center.dim(); }
  double distance_to_center(const Point& p) const;
  bool contains(const Point& p) const;

  /// Smallest Euclidean ball with the same center containing this ball.
  CompactBall enclosing_euclidean() const;

  /// Nearest point of the ball (Euclidean balls: radial projection; boxes:
  /// coordinate clamp).
  Point project(const Point& p) const;

  friend bool operator==(const CompactBall&, const CompactBall&) = default;
};

// ---------------------------------------------------------------------------

/// The sequence (..., x_{n-1}, y_{n-1}, x_n) as seen at round n. Realized
/// pairs live in an immutable shared chain, newest first, so extending a
/// history is O(1) and every older history stays valid. Rounds <= 0 are the
/// implicit "no feedback" prefix and are never materialized.
class History {
 public:
  /// Round-1 history: only the prepast and the first signal.
  static History start(Point first_signal);

  /// Round index n (pairs() has n-1 entries).
  std::size_t round() const { return length_ + 1; }
  std::size_t pair_count() const { return length_; }
  const Point& current_signal() const { return current_signal_; }
  bool has_prepast() const { return true; }

  /// The (signal, observation) pair `lag` rounds back, lag = 1 being round
  /// n-1. Empty when the lag reaches into the prepast.
  std::optional<std::pair<Point, Point>> pair_back(std::size_t lag) const;

  /// Observation y_{n-lag}, or nullptr inside the prepast.
  const Point* observation_back(std::size_t lag) const;

  /// All realized pairs, oldest first.
  std::vector<std::pair<Point, Point>> pairs() const;

  friend bool operator==(const History& a, const History& b);

 private:
  struct Node;
  friend History history_extend(const History&, const Point&, const Point&);

  std::shared_ptr<const Node> head_;
  std::size_t length_ = 0;
  Point current_signal_;
};

/// Round n+1 history from round n: records (x_n, observation) and moves on to
/// next_signal. The input is left untouched.
History history_extend(const History& h, const Point& observation, const Point& next_signal);

// ---------------------------------------------------------------------------

enum class LossKind { squared_norm, absolute_norm, custom };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// lambda(gamma, y) plus the two oracles the clipping machinery relies on.
class LossFunction {
 public:
  using Evaluator = std::function<double(const Point& prediction, const Point& observation)>;
  using BoundOracle = std::function<double(const CompactBall& gamma_region, const CompactBall& obs_region)>;
  using SublevelOracle = std::function<CompactBall(const CompactBall& obs_region, double threshold)>;

  static LossFunction squared_norm(std::size_t dim);
  static LossFunction absolute_norm(std::size_t dim);
  static LossFunction builtin(LossKind kind, std::size_t dim);
  static LossFunction custom(std::size_t prediction_dim, std::size_t observation_dim, Evaluator eval,
                             bool convex_in_prediction, BoundOracle bound = {}, SublevelOracle sublevel = {});

  LossKind kind() const { return kind_; }
  std::size_t prediction_dim() const { return prediction_dim_; }
  std::size_t observation_dim() const { return observation_dim_; }
  bool convex_in_prediction() const { return convex_; }
  /// The flag is metadata: it never changes arithmetic.
  void set_convex_in_prediction(bool convex) { convex_ = convex; }

  const BoundOracle& bound_oracle() const { return bound_; }
  const SublevelOracle& sublevel_oracle() const { return sublevel_; }
  const Evaluator& evaluator() const { return eval_; }

 private:
  LossKind kind_ = LossKind::squared_norm;
  std::size_t prediction_dim_ = 0;
  std::size_t observation_dim_ = 0;
  bool convex_ = true;
  Evaluator eval_;
  BoundOracle bound_;
  SublevelOracle sublevel_;
};

double loss_eval(const LossFunction& loss, const Point& prediction, const Point& observation);

/// An upper bound on |lambda| over gamma_region x obs_region. Closed form for
/// the built-in norms: (r_gamma + r_y + |c_gamma - c_y|)^p with p = 1 or 2.
double loss_bound_on(const LossFunction& loss, const CompactBall& gamma_region, const CompactBall& obs_region);

/// A ball C, centred on obs_region, outside which lambda(., y) > threshold
/// for every y in obs_region.
CompactBall sublevel_compact(const LossFunction& loss, const CompactBall& obs_region, double threshold);

}  // namespace waa
