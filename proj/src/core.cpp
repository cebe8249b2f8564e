#include "waa/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace waa {

namespace {

void require_finite(std::span<const double> coords) {
  for (double c : coords) {
    if (!std::isfinite(c)) throw std::invalid_argument("Point: non-finite coordinate");
  }
}

void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Point::Point(std::initializer_list<double> coords) : coords_(coords) { require_finite(coords_); }

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) { require_finite(coords_); }

double euclidean_distance(const Point& a, const Point& b) {
  require_same_dim(a, b, "euclidean_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_distance(const Point& a, const Point& b) {
  require_same_dim(a, b, "max_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double euclidean_norm(const Point& a) { return euclidean_distance(a, Point::zeros(a.dim())); }

Point combine(double a, const Point& p, double b, const Point& q) {
  require_same_dim(p, q, "combine");
  std::vector<double> out(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) out[i] = a * p[i] + b * q[i];
  return Point(std::move(out));
}

// ---------------------------------------------------------------------------

CompactBall::CompactBall(Point c, double r, BallNorm n) : center(std::move(c)), radius(r), norm(n) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("CompactBall: radius must be finite and >= 0");
}

double CompactBall::distance_to_center(const Point& p) const {
  return norm == BallNorm::euclidean ? euclidean_distance(p, center) : max_distance(p, center);
}

bool CompactBall::contains(const Point& p) const { return distance_to_center(p) <= radius; }

CompactBall CompactBall::enclosing_euclidean() const {
  if (norm == BallNorm::euclidean) return *this;
  return CompactBall(center, radius * std::sqrt(static_cast<double>(dim())), BallNorm::euclidean);
}

Point CompactBall::project(const Point& p) const {
  if (contains(p)) return p;
  if (norm == BallNorm::max) {
    std::vector<double> out(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) out[i] = std::clamp(p[i], center[i] - radius, center[i] + radius);
    return Point(std::move(out));
  }
  const double d = euclidean_distance(p, center);
  const double t = radius / d;
  return combine(1.0 - t, center, t, p);
}

// ---------------------------------------------------------------------------

struct History::Node {
  Point signal;
  Point observation;
  std::shared_ptr<const Node> prev;

  Node(Point x, Point y, std::shared_ptr<const Node> p)
      : signal(std::move(x)), observation(std::move(y)), prev(std::move(p)) {}

  // Unlink the chain iteratively; long games would overflow the stack otherwise.
  ~Node() {
    auto p = std::move(prev);
    while (p && p.use_count() == 1) {
      auto next = std::move(const_cast<Node&>(*p).prev);
      p = std::move(next);
    }
  }
};

History History::start(Point first_signal) {
  History h;
  h.current_signal_ = std::move(first_signal);
  return h;
}

std::optional<std::pair<Point, Point>> History::pair_back(std::size_t lag) const {
  if (lag == 0 || lag > length_) return std::nullopt;
  const Node* node = head_.get();
  for (std::size_t i = 1; i < lag; ++i) node = node->prev.get();
  return std::make_pair(node->signal, node->observation);
}

const Point* History::observation_back(std::size_t lag) const {
  if (lag == 0 || lag > length_) return nullptr;
  const Node* node = head_.get();
  for (std::size_t i = 1; i < lag; ++i) node = node->prev.get();
  return &node->observation;
}

std::vector<std::pair<Point, Point>> History::pairs() const {
  std::vector<std::pair<Point, Point>> out;
  out.reserve(length_);
  for (const Node* node = head_.get(); node != nullptr; node = node->prev.get())
    out.emplace_back(node->signal, node->observation);
  std::reverse(out.begin(), out.end());
  return out;
}

bool operator==(const History& a, const History& b) {
  if (a.length_ != b.length_ || !(a.current_signal_ == b.current_signal_)) return false;
  const History::Node* p = a.head_.get();
  const History::Node* q = b.head_.get();
  while (p != nullptr && p != q) {
    if (!(p->signal == q->signal) || !(p->observation == q->observation)) return false;
    p = p->prev.get();
    q = q->prev.get();
  }
  return true;
}

History history_extend(const History& h, const Point& observation, const Point& next_signal) {
  if (h.head_ != nullptr) {
    if (observation.dim() != h.head_->observation.dim())
      throw std::invalid_argument("history_extend: observation dimension mismatch");
  }
  if (next_signal.dim() != h.current_signal_.dim())
    throw std::invalid_argument("history_extend: signal dimension mismatch");
  History out;
  out.head_ = std::make_shared<History::Node>(h.current_signal_, observation, h.head_);
  out.length_ = h.length_ + 1;
  out.current_signal_ = next_signal;
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::squared_norm: return "squared_norm";
    case LossKind::absolute_norm: return "absolute_norm";
    case LossKind::custom: return "custom";
  }
  return "custom";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "squared_norm") return LossKind::squared_norm;
  if (name == "absolute_norm") return LossKind::absolute_norm;
  throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

LossFunction LossFunction::squared_norm(std::size_t dim) { return builtin(LossKind::squared_norm, dim); }

LossFunction LossFunction::absolute_norm(std::size_t dim) { return builtin(LossKind::absolute_norm, dim); }

LossFunction LossFunction::builtin(LossKind kind, std::size_t dim) {
  if (kind == LossKind::custom) throw std::invalid_argument("LossFunction::builtin: custom is not built in");
  LossFunction f;
  f.kind_ = kind;
  f.prediction_dim_ = dim;
  f.observation_dim_ = dim;
  f.convex_ = true;
  return f;
}

LossFunction LossFunction::custom(std::size_t prediction_dim, std::size_t observation_dim, Evaluator eval,
                                  bool convex_in_prediction, BoundOracle bound, SublevelOracle sublevel) {
  if (!eval) throw std::invalid_argument("LossFunction::custom: evaluator required");
  LossFunction f;
  f.kind_ = LossKind::custom;
  f.prediction_dim_ = prediction_dim;
  f.observation_dim_ = observation_dim;
  f.convex_ = convex_in_prediction;
  f.eval_ = std::move(eval);
  f.bound_ = std::move(bound);
  f.sublevel_ = std::move(sublevel);
  return f;
}

namespace {

void check_arity(const LossFunction& loss, std::size_t gamma_dim, std::size_t y_dim) {
  if (gamma_dim != loss.prediction_dim() || y_dim != loss.observation_dim()) {
    std::ostringstream os;
    os << "loss arity (" << loss.prediction_dim() << ", " << loss.observation_dim() << ") does not match ("
       << gamma_dim << ", " << y_dim << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

double loss_eval(const LossFunction& loss, const Point& prediction, const Point& observation) {
  check_arity(loss, prediction.dim(), observation.dim());
  switch (loss.kind()) {
    case LossKind::squared_norm: {
      double s = 0.0;
      for (std::size_t i = 0; i < prediction.dim(); ++i) {
        const double d = observation[i] - prediction[i];
        s += d * d;
      }
      return s;
    }
    case LossKind::absolute_norm: return euclidean_distance(observation, prediction);
    case LossKind::custom: return loss.evaluator()(prediction, observation);
  }
  return 0.0;
}

double loss_bound_on(const LossFunction& loss, const CompactBall& gamma_region, const CompactBall& obs_region) {
  check_arity(loss, gamma_region.dim(), obs_region.dim());
  if (loss.kind() == LossKind::custom) {
    if (!loss.bound_oracle()) throw UnsupportedError("loss_bound_on: custom loss has no bound oracle");
    return loss.bound_oracle()(gamma_region, obs_region);
  }
  const CompactBall g = gamma_region.enclosing_euclidean();
  const CompactBall y = obs_region.enclosing_euclidean();
  const double reach = g.radius + y.radius + euclidean_distance(g.center, y.center);
  return loss.kind() == LossKind::squared_norm ? reach * reach : reach;
}

CompactBall sublevel_compact(const LossFunction& loss, const CompactBall& obs_region, double threshold) {
  if (obs_region.dim() != loss.observation_dim()) throw std::invalid_argument("sublevel_compact: dimension mismatch");
  if (loss.kind() == LossKind::custom) {
    if (!loss.sublevel_oracle()) throw UnsupportedError("sublevel_compact: custom loss has no sublevel oracle");
    return loss.sublevel_oracle()(obs_region, threshold);
  }
  const CompactBall y = obs_region.enclosing_euclidean();
  const double reach = loss.kind() == LossKind::squared_norm ? std::sqrt(std::max(threshold, 0.0))
                                                             : std::max(threshold, 0.0);
  return CompactBall(y.center, y.radius + reach);
}

}  // namespace waa
