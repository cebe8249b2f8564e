#pragma once

// Unbounded domains: the game of removal (a doubling trick over nested boxes),
// clipping of strategies into compact balls, and the restart meta-strategy
// that runs a fresh aggregator per stage.

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "waa/core.hpp"
#include "waa/engine.hpp"
#include "waa/experts.hpp"
#include "waa/randomized.hpp"

namespace waa {

/// Remover's position: stage k plays the max-norm boxes A_k x B_k of radius
/// base_radius * 2^k around fixed centres. Stage 0 is the opening move.
struct RemovalState {
  std::size_t stage = 0;
  double base_radius = 1.0;
  CompactBall signal_box;
  CompactBall observation_box;
  std::size_t escape_count = 0;

  static RemovalState initial(const Point& signal_center, const Point& observation_center, double base_radius);
  static RemovalState at_stage(const Point& signal_center, const Point& observation_center, double base_radius,
                               std::size_t stage);

  double radius() const { return observation_box.radius; }
  bool contains(const Point& signal, const Point& observation) const;
};

/// base_radius * 2^stage.
double stage_radius(double base_radius, std::size_t stage);

/// Smallest stage whose box has radius >= extent.
std::size_t stage_for_extent(double base_radius, double extent);

/// Remover's answer to an escape: the smallest later stage containing the
/// escaping pair. Throws ProtocolError if the pair is not outside.
RemovalState remover_next(const RemovalState& state, const Point& signal, const Point& observation);

// ---------------------------------------------------------------------------

/// gamma0 in C1, C1 strictly inside C2 (same centre), M1 <= M2, with
///   lambda(gamma, y) > M1 + 1 off C1 and > M2 + 1 off C2, for y in B.
struct ClippingSpec {
  Point gamma0;
  CompactBall inner;  // C1
  CompactBall outer;  // C2
  double inner_level = 0.0;  // M1
  double outer_level = 0.0;  // M2

  void validate() const;
};

ClippingSpec build_clipping(const LossFunction& loss, const CompactBall& observation_region, const Point& gamma0);

/// The bump f1: 1 on C1, 0 off C2, distance ratio in between.
double clip_weight(const ClippingSpec& spec, const Point& gamma);

/// Deterministic clip: g on C1, gamma0 off C2, f1(g) g + (1 - f1(g)) gamma0
/// in between.
Point clip_point(const ClippingSpec& spec, const Point& g);

/// Each atom keeps f1 of its mass; the rest moves to gamma0.
DiscreteMeasure clip_measure(const ClippingSpec& spec, const DiscreteMeasure& mu);

inline Point clip_prediction(const ClippingSpec& spec, const Point& g) { return clip_point(spec, g); }
inline DiscreteMeasure clip_prediction(const ClippingSpec& spec, const DiscreteMeasure& mu) {
  return clip_measure(spec, mu);
}

/// A stationary strategy composed with clip_point.
struct ClippedStrategy {
  StationaryStrategy base;
  ClippingSpec spec;

  Point operator()(const History& h) const { return clip_point(spec, strategy_predict(base, h)); }
};

ClippedStrategy clip_strategy(const ClippingSpec& spec, const StationaryStrategy& d);

// ---------------------------------------------------------------------------

struct MetaConfig {
  LossFunction loss = LossFunction::squared_norm(1);
  double base_radius = 1.0;
  Point signal_center;
  Point observation_center;
  Point gamma0;
  /// Warm-start each new stage by re-running it over the whole transcript.
  bool replay_on_restart = false;
  LearningRate rate = LearningRate::decaying();
};

template <class Prediction>
struct MetaRoundReport {
  RoundReport<Prediction> inner;
  std::size_t stage = 0;
  /// Rounds completed by the stage's aggregator, this one included.
  std::size_t stage_round = 0;
  /// |lambda| bound over C2 x B_k for the stage that played this round.
  double stage_loss_bound = 0.0;
  /// The observed pair stayed inside the stage's box.
  bool inside = true;
  /// This round's pair escaped and triggered a restart.
  bool stage_changed = false;
};

/// Plays the prediction game as Evader in the game of removal: an aggregator
/// over experts clipped into C(B_k) runs until a pair (x_n, y_n) leaves
/// A_k x B_k, then Remover moves and a new stage begins on the next round.
template <class Prediction>
class RemovalMeta {
 public:
  RemovalMeta(MetaConfig config, std::vector<ExpertFn<Prediction>> experts, std::vector<double> priors);

  /// Signal step: returns the prediction for this round.
  const Prediction& predict(const Point& signal);
  /// Observation step.
  const MetaRoundReport<Prediction>& observe(const Point& observation);

  const RemovalState& removal_state() const { return removal_; }
  std::size_t restarts() const { return removal_.escape_count; }
  const ClippingSpec& clipping() const { return spec_; }
  double stage_loss_bound() const { return stage_bound_; }
  const WeakAggregator<Prediction>& aggregator() const { return *inner_; }
  const Transcript& transcript() const { return transcript_; }
  std::size_t rounds_completed() const { return transcript_.size(); }

 private:
  void start_stage();

  MetaConfig config_;
  std::vector<ExpertFn<Prediction>> experts_;
  std::vector<double> priors_;
  RemovalState removal_;
  ClippingSpec spec_;
  double stage_bound_ = 0.0;
  std::optional<WeakAggregator<Prediction>> inner_;
  Transcript transcript_;
  std::optional<History> sigma_;
  bool awaiting_observation_ = false;
  MetaRoundReport<Prediction> report_;
};

extern template class RemovalMeta<Point>;
extern template class RemovalMeta<DiscreteMeasure>;

}  // namespace waa
