#include <cmath>
#include <fstream>
#include <stdexcept>

#include "waa/harness.hpp"

namespace waa {

using nlohmann::json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::deterministic: return "deterministic";
    case Mode::randomized: return "randomized";
    case Mode::removal: return "removal";
    case Mode::removal_randomized: return "removal-randomized";
  }
  return "deterministic";
}

Mode mode_from_string(std::string_view name) {
  if (name == "deterministic") return Mode::deterministic;
  if (name == "randomized") return Mode::randomized;
  if (name == "removal") return Mode::removal;
  if (name == "removal-randomized") return Mode::removal_randomized;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

std::string_view to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::iid_gaussian: return "iid_gaussian";
    case EnvironmentKind::ar1: return "ar1";
    case EnvironmentKind::drifting_sine: return "drifting_sine";
    case EnvironmentKind::adversarial_worstcase: return "adversarial_worstcase";
    case EnvironmentKind::escaping: return "escaping";
  }
  return "iid_gaussian";
}

EnvironmentKind environment_kind_from_string(std::string_view name) {
  if (name == "iid_gaussian") return EnvironmentKind::iid_gaussian;
  if (name == "ar1") return EnvironmentKind::ar1;
  if (name == "drifting_sine") return EnvironmentKind::drifting_sine;
  if (name == "adversarial_worstcase" || name == "adversarial") return EnvironmentKind::adversarial_worstcase;
  if (name == "escaping") return EnvironmentKind::escaping;
  throw std::invalid_argument("unknown environment kind: " + std::string(name));
}

double EnvironmentSpec::param(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

void RunConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (pool.size < 1) throw std::invalid_argument("config: pool size must be >= 1");
  if (dims.observation != dims.prediction) throw std::invalid_argument("config: built-in losses need equal Y and Gamma dims");
  if (loss == LossKind::custom) throw std::invalid_argument("config: custom losses cannot be configured from a file");
  // Built-in norm losses are convex whatever convex_in_prediction says; the
  // flag only switches the countable-convexity check off.
  if (!is_removal(mode)) {
    if (prediction_region.dim() != dims.prediction || observation_region.dim() != dims.observation)
      throw std::invalid_argument("config: region dimensions do not match the spaces");
  }
  if (!(base_radius > 0.0)) throw std::invalid_argument("config: removal base radius must be positive");
  if (is_randomized(mode) && pool.spreads.empty()) throw std::invalid_argument("config: randomized mode needs spreads");
  for (double s : pool.spreads) {
    if (!(s >= 0.0)) throw std::invalid_argument("config: spreads must be non-negative");
  }
  if (mutation_fixed_beta && !(*mutation_fixed_beta > 0.0 && *mutation_fixed_beta < 1.0))
    throw std::invalid_argument("config: mutation fixed_beta must lie in (0, 1)");
  if (!(pool.enumeration.dims == dims)) throw std::invalid_argument("config: enumeration dims out of sync");
}

LossFunction make_loss(const RunConfig& config) {
  LossFunction loss = LossFunction::builtin(config.loss, config.dims.prediction);
  loss.set_convex_in_prediction(config.convex_in_prediction);
  return loss;
}

namespace {

// A bare number means the same value on every coordinate.
Point point_from(const json& j, std::size_t dim) {
  if (j.is_number()) return Point(std::vector<double>(dim, j.get<double>()));
  auto v = j.get<std::vector<double>>();
  if (v.size() != dim) throw std::invalid_argument("config: point has the wrong dimension");
  return Point(std::move(v));
}

CompactBall ball_from(const json& j, std::size_t dim, const CompactBall& fallback) {
  if (j.is_null()) return fallback;
  return CompactBall(point_from(j.at("center"), dim), j.at("radius").get<double>());
}

GridAxis axis_from(const json& j, GridAxis fallback) {
  if (j.is_null()) return fallback;
  return GridAxis{j.value("origin", fallback.origin), j.value("half_width", fallback.half_width)};
}

json ball_to(const CompactBall& b) {
  return json{{"center", std::vector<double>(b.center.coords().begin(), b.center.coords().end())}, {"radius", b.radius}};
}

json axis_to(const GridAxis& a) { return json{{"origin", a.origin}, {"half_width", a.half_width}}; }

const json& member(const json& j, const char* key) {
  static const json null_value;
  const auto it = j.find(key);
  return it == j.end() ? null_value : *it;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  const json& spaces = member(j, "spaces");
  if (!spaces.is_null()) {
    c.dims.signal = spaces.value("signal_dim", c.dims.signal);
    c.dims.observation = spaces.value("observation_dim", c.dims.observation);
  }
  c.dims.prediction = c.dims.observation;

  c.loss = loss_kind_from_string(j.value("loss", std::string("squared_norm")));
  c.convex_in_prediction = j.value("convex_in_prediction", true);
  c.mode = mode_from_string(j.value("mode", std::string("deterministic")));

  const CompactBall unit(Point(std::vector<double>(c.dims.observation, 0.5)), 0.5);
  c.prediction_region = ball_from(member(j, "prediction_region"), c.dims.prediction, unit);
  c.observation_region = ball_from(member(j, "observation_region"), c.dims.observation, unit);

  EnumConfig& e = c.pool.enumeration;
  e.dims = c.dims;
  e.output = GridAxis{c.prediction_region.center.dim() > 0 ? c.prediction_region.center[0] : 0.0,
                      c.prediction_region.radius > 0.0 ? c.prediction_region.radius : 1.0};
  const json& pool = member(j, "pool");
  if (!pool.is_null()) {
    c.pool.size = pool.value("size", c.pool.size);
    const std::string rule = pool.value("priors", std::string("geometric"));
    if (rule == "geometric") c.pool.priors = PriorRule::geometric;
    else if (rule == "uniform") c.pool.priors = PriorRule::uniform;
    else throw std::invalid_argument("config: unknown prior rule " + rule);
    if (pool.contains("spreads")) c.pool.spreads = pool.at("spreads").get<std::vector<double>>();
    const json& en = member(pool, "enumeration");
    if (!en.is_null()) {
      if (en.contains("families")) {
        e.constant = e.linear_memory = e.nearest_centroid = false;
        for (const auto& f : en.at("families")) {
          const std::string name = f.get<std::string>();
          if (name == "constant") e.constant = true;
          else if (name == "linear_memory") e.linear_memory = true;
          else if (name == "nearest_centroid") e.nearest_centroid = true;
          else throw std::invalid_argument("config: unknown strategy family " + name);
        }
      }
      if (en.contains("memory")) {
        const auto m = en.at("memory").get<std::vector<std::size_t>>();
        if (m.size() != 2) throw std::invalid_argument("config: memory must be [min, max]");
        e.min_memory = m[0];
        e.max_memory = m[1];
      }
      e.centroid_count = en.value("centroids", e.centroid_count);
      e.max_level = en.value("max_level", e.max_level);
      e.output = axis_from(member(en, "output_grid"), e.output);
      e.coefficient = axis_from(member(en, "coefficient_grid"), e.coefficient);
      e.anchor = axis_from(member(en, "anchor_grid"), e.anchor);
    }
  }

  const json& env = member(j, "environment");
  if (!env.is_null()) {
    c.environment.kind = environment_kind_from_string(env.value("kind", std::string("iid_gaussian")));
    c.environment.seed = env.value("seed", std::uint64_t{0});
    if (env.contains("params")) c.environment.params = env.at("params").get<std::map<std::string, double>>();
  }

  c.horizon = j.value("horizon", c.horizon);
  c.rng_seed = j.value("rng_seed", c.rng_seed);

  const json& removal = member(j, "removal");
  if (!removal.is_null()) {
    c.base_radius = removal.value("base_radius", c.base_radius);
    c.replay_on_restart = removal.value("replay_on_restart", c.replay_on_restart);
  }
  const json& checks = member(j, "checks");
  if (!checks.is_null()) c.lil_threshold = checks.value("lil_threshold", c.lil_threshold);
  const json& mutation = member(j, "mutation");
  if (!mutation.is_null() && mutation.contains("fixed_beta")) c.mutation_fixed_beta = mutation.at("fixed_beta").get<double>();

  const json& output = member(j, "output");
  if (!output.is_null()) {
    c.trace_path = output.value("trace", std::string());
    c.summary_path = output.value("summary", std::string());
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  const EnumConfig& e = c.pool.enumeration;
  json families = json::array();
  if (e.constant) families.push_back("constant");
  if (e.linear_memory) families.push_back("linear_memory");
  if (e.nearest_centroid) families.push_back("nearest_centroid");
  json j{
      {"spaces", {{"signal_dim", c.dims.signal}, {"observation_dim", c.dims.observation}}},
      {"loss", std::string(to_string(c.loss))},
      {"convex_in_prediction", c.convex_in_prediction},
      {"mode", std::string(to_string(c.mode))},
      {"prediction_region", ball_to(c.prediction_region)},
      {"observation_region", ball_to(c.observation_region)},
      {"pool",
       {{"size", c.pool.size},
        {"priors", c.pool.priors == PriorRule::geometric ? "geometric" : "uniform"},
        {"spreads", c.pool.spreads},
        {"enumeration",
         {{"families", families},
          {"memory", {e.min_memory, e.max_memory}},
          {"centroids", e.centroid_count},
          {"max_level", e.max_level},
          {"output_grid", axis_to(e.output)},
          {"coefficient_grid", axis_to(e.coefficient)},
          {"anchor_grid", axis_to(e.anchor)}}}}},
      {"environment",
       {{"kind", std::string(to_string(c.environment.kind))},
        {"seed", c.environment.seed},
        {"params", c.environment.params}}},
      {"horizon", c.horizon},
      {"rng_seed", c.rng_seed},
      {"removal", {{"base_radius", c.base_radius}, {"replay_on_restart", c.replay_on_restart}}},
      {"checks", {{"lil_threshold", c.lil_threshold}}},
      {"output", {{"trace", c.trace_path}, {"summary", c.summary_path}}},
  };
  if (c.mutation_fixed_beta) j["mutation"] = {{"fixed_beta", *c.mutation_fixed_beta}};
  return j;
}

json measure_to_json(const DiscreteMeasure& measure) {
  json out = json::array();
  for (const Atom& a : measure.atoms())
    out.push_back({{"point", std::vector<double>(a.point.coords().begin(), a.point.coords().end())}, {"mass", a.mass}});
  return out;
}

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("measure: expected an array of atoms");
  std::vector<Atom> atoms;
  for (const auto& a : j) atoms.push_back({Point(a.at("point").get<std::vector<double>>()), a.at("mass").get<double>()});
  return DiscreteMeasure(std::move(atoms));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace waa
