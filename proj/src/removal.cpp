#include "waa/removal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace waa {

double stage_radius(double base_radius, std::size_t stage) {
  return std::ldexp(base_radius, static_cast<int>(stage));
}

std::size_t stage_for_extent(double base_radius, double extent) {
  std::size_t j = 0;
  while (stage_radius(base_radius, j) < extent) ++j;
  return j;
}

RemovalState RemovalState::initial(const Point& signal_center, const Point& observation_center, double base_radius) {
  return at_stage(signal_center, observation_center, base_radius, 0);
}

RemovalState RemovalState::at_stage(const Point& signal_center, const Point& observation_center, double base_radius,
                                    std::size_t stage) {
  if (!(base_radius > 0.0)) throw std::invalid_argument("RemovalState: base radius must be positive");
  RemovalState s;
  s.stage = stage;
  s.base_radius = base_radius;
  const double r = stage_radius(base_radius, stage);
  s.signal_box = CompactBall(signal_center, r, BallNorm::max);
  s.observation_box = CompactBall(observation_center, r, BallNorm::max);
  return s;
}

bool RemovalState::contains(const Point& signal, const Point& observation) const {
  return signal_box.contains(signal) && observation_box.contains(observation);
}

RemovalState remover_next(const RemovalState& state, const Point& signal, const Point& observation) {
  if (state.contains(signal, observation)) throw ProtocolError("remover_next: point lies inside the current compact");
  const double extent = std::max(state.signal_box.distance_to_center(signal),
                                 state.observation_box.distance_to_center(observation));
  const std::size_t next = std::max(state.stage + 1, stage_for_extent(state.base_radius, extent));
  RemovalState out = RemovalState::at_stage(state.signal_box.center, state.observation_box.center,
                                            state.base_radius, next);
  out.escape_count = state.escape_count + 1;
  return out;
}

// ---------------------------------------------------------------------------

void ClippingSpec::validate() const {
  if (!(inner.center == outer.center)) throw std::invalid_argument("ClippingSpec: C1 and C2 must share a centre");
  if (!(inner.radius < outer.radius)) throw std::invalid_argument("ClippingSpec: C1 must lie inside the interior of C2");
  if (!inner.contains(gamma0)) throw std::invalid_argument("ClippingSpec: gamma0 must lie in C1");
  if (!(inner_level <= outer_level)) throw std::invalid_argument("ClippingSpec: M1 must not exceed M2");
}

ClippingSpec build_clipping(const LossFunction& loss, const CompactBall& observation_region, const Point& gamma0) {
  if (gamma0.dim() != loss.prediction_dim()) throw std::invalid_argument("build_clipping: gamma0 dimension mismatch");
  ClippingSpec spec;
  spec.gamma0 = gamma0;
  spec.inner_level = loss_bound_on(loss, CompactBall(gamma0, 0.0), observation_region);

  CompactBall c1 = sublevel_compact(loss, observation_region, spec.inner_level + 1.0);
  c1.radius = std::max(c1.radius, euclidean_distance(gamma0, c1.center));
  spec.inner = c1;

  spec.outer_level = loss_bound_on(loss, c1, observation_region);
  CompactBall c2 = sublevel_compact(loss, observation_region, spec.outer_level + 1.0);
  if (!(c2.center == c1.center)) throw UnsupportedError("build_clipping: sublevel sets must share a centre");
  if (c2.radius <= c1.radius) c2.radius = c1.radius + 1.0;
  spec.outer = c2;
  spec.validate();
  return spec;
}

double clip_weight(const ClippingSpec& spec, const Point& gamma) {
  const double d = euclidean_distance(gamma, spec.inner.center);
  if (d <= spec.inner.radius) return 1.0;
  if (d >= spec.outer.radius) return 0.0;
  const double to_inner = d - spec.inner.radius;
  const double to_outside = spec.outer.radius - d;
  return to_outside / (to_inner + to_outside);
}

Point clip_point(const ClippingSpec& spec, const Point& g) {
  const double f = clip_weight(spec, g);
  if (f == 1.0) return g;
  if (f == 0.0) return spec.gamma0;
  return combine(f, g, 1.0 - f, spec.gamma0);
}

DiscreteMeasure clip_measure(const ClippingSpec& spec, const DiscreteMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size() + 1);
  double moved = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double f = clip_weight(spec, a.point);
    if (f == 1.0) {
      atoms.push_back(a);
      continue;
    }
    atoms.push_back({a.point, a.mass * f});
    moved += a.mass - a.mass * f;
  }
  atoms.push_back({spec.gamma0, moved});
  return DiscreteMeasure(std::move(atoms));
}

ClippedStrategy clip_strategy(const ClippingSpec& spec, const StationaryStrategy& d) {
  spec.validate();
  return {d, spec};
}

// ---------------------------------------------------------------------------

template <class Prediction>
RemovalMeta<Prediction>::RemovalMeta(MetaConfig config, std::vector<ExpertFn<Prediction>> experts,
                                     std::vector<double> priors)
    : config_(std::move(config)), experts_(std::move(experts)), priors_(std::move(priors)) {
  if (experts_.empty()) throw ProtocolError("RemovalMeta: empty expert pool");
  if (config_.gamma0.dim() == 0 && config_.loss.prediction_dim() != 0)
    config_.gamma0 = Point::zeros(config_.loss.prediction_dim());
  if (config_.observation_center.dim() == 0 && config_.loss.observation_dim() != 0)
    config_.observation_center = Point::zeros(config_.loss.observation_dim());
  removal_ = RemovalState::initial(config_.signal_center, config_.observation_center, config_.base_radius);
  start_stage();
}

template <class Prediction>
void RemovalMeta<Prediction>::start_stage() {
  spec_ = build_clipping(config_.loss, removal_.observation_box, config_.gamma0);
  stage_bound_ = loss_bound_on(config_.loss, spec_.outer, removal_.observation_box);
  std::vector<ExpertFn<Prediction>> clipped;
  clipped.reserve(experts_.size());
  for (const auto& expert : experts_) {
    clipped.push_back([expert, spec = spec_](const History& h) { return clip_prediction(spec, expert(h)); });
  }
  if (config_.replay_on_restart) {
    inner_.emplace(WeakAggregator<Prediction>::resume(config_.loss, std::move(clipped), priors_, transcript_,
                                                      config_.rate));
  } else {
    inner_.emplace(config_.loss, std::move(clipped), priors_, config_.rate);
  }
}

template <class Prediction>
const Prediction& RemovalMeta<Prediction>::predict(const Point& signal) {
  if (awaiting_observation_) throw ProtocolError("RemovalMeta: signal received while awaiting an observation");
  if (!sigma_) {
    sigma_ = History::start(signal);
  } else {
    sigma_ = history_extend(*sigma_, transcript_.back().observation, signal);
  }
  awaiting_observation_ = true;
  return inner_->begin_round(*sigma_);
}

template <class Prediction>
const MetaRoundReport<Prediction>& RemovalMeta<Prediction>::observe(const Point& observation) {
  if (!awaiting_observation_) throw ProtocolError("RemovalMeta: observation received before a signal");
  report_ = MetaRoundReport<Prediction>{};
  report_.inner = inner_->end_round(observation);
  report_.stage = removal_.stage;
  report_.stage_round = inner_->rounds_completed();
  report_.stage_loss_bound = stage_bound_;
  transcript_.push_back({*sigma_, observation});
  awaiting_observation_ = false;

  const Point& signal = sigma_->current_signal();
  report_.inside = removal_.contains(signal, observation);
  if (!report_.inside) {
    removal_ = remover_next(removal_, signal, observation);
    report_.stage_changed = true;
    start_stage();
  }
  return report_;
}

template class RemovalMeta<Point>;
template class RemovalMeta<DiscreteMeasure>;

}  // namespace waa
