#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "waa/engine.hpp"
#include "waa/harness.hpp"
#include "waa/removal.hpp"

namespace py = pybind11;
using namespace waa;

namespace {

Point to_point(const std::vector<double>& v) { return Point(v); }
std::vector<double> from_point(const Point& p) { return {p.coords().begin(), p.coords().end()}; }

LossFunction loss_of(const std::string& kind, std::size_t dim) { return LossFunction::builtin(loss_kind_from_string(kind), dim); }

nlohmann::json checks_json(const std::vector<CheckResult>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"worst_margin", c.worst_margin},
                   {"evaluations", c.evaluations},
                   {"failures", c.failures},
                   {"first_failure_round", c.first_failure_round}});
  return out;
}

}  // namespace

PYBIND11_MODULE(_waa, m) {
  m.doc() = "Weak Aggregating Algorithm core";

  m.def("run", [](const std::string& config_json) {
    const RunSummary s = run(config_from_json(nlohmann::json::parse(config_json)));
    return py::make_tuple(summary_to_json(s).dump(), write_trace(s));
  }, py::arg("config_json"), "Run one experiment; returns (summary JSON, trace CSV).");

  m.def("verify", [](const std::string& config_json) {
    const VerifyReport r = verify_suite(config_from_json(nlohmann::json::parse(config_json)));
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : r.properties)
      out.push_back({{"name", p.name}, {"passed", p.passed}, {"worst_margin", p.worst_margin}, {"cases", p.cases}});
    return out.dump();
  }, py::arg("config_json"));

  m.def("replay", [](const std::string& trace_csv) {
    std::istringstream in(trace_csv);
    return checks_json(replay_checks(parse_trace(in))).dump();
  }, py::arg("trace_csv"));

  m.def("normalize_config", [](const std::string& config_json) {
    return config_to_json(config_from_json(nlohmann::json::parse(config_json))).dump();
  }, py::arg("config_json"));

  m.def("loss_eval", [](const std::string& kind, const std::vector<double>& g, const std::vector<double>& y) {
    return loss_eval(loss_of(kind, y.size()), to_point(g), to_point(y));
  }, py::arg("kind"), py::arg("prediction"), py::arg("observation"));

  m.def("loss_bound", [](const std::string& kind, const std::vector<double>& gc, double gr, const std::vector<double>& yc,
                         double yr) {
    return loss_bound_on(loss_of(kind, yc.size()), CompactBall(to_point(gc), gr), CompactBall(to_point(yc), yr));
  }, py::arg("kind"), py::arg("gamma_center"), py::arg("gamma_radius"), py::arg("obs_center"), py::arg("obs_radius"));

  m.def("lemma5_bound", &lemma5_bound_value, py::arg("loss_bound"), py::arg("prior"), py::arg("rounds"));

  m.def("mean_comparison", [](const std::vector<double>& q, const std::vector<double>& cumulative, std::size_t n) {
    const MeanComparison r = mean_comparison(q, cumulative, n);
    return py::make_tuple(r.lhs, r.rhs, r.holds);
  }, py::arg("priors"), py::arg("cumulative"), py::arg("n"));

  m.def("build_clipping", [](const std::string& kind, const std::vector<double>& center, double radius,
                             const std::vector<double>& gamma0) {
    const ClippingSpec s = build_clipping(loss_of(kind, center.size()), CompactBall(to_point(center), radius), to_point(gamma0));
    py::dict d;
    d["gamma0"] = from_point(s.gamma0);
    d["inner_radius"] = s.inner.radius;
    d["outer_radius"] = s.outer.radius;
    d["inner_level"] = s.inner_level;
    d["outer_level"] = s.outer_level;
    return d;
  }, py::arg("kind"), py::arg("obs_center"), py::arg("obs_radius"), py::arg("gamma0"));

  m.def("clip_point", [](const std::string& kind, const std::vector<double>& center, double radius,
                         const std::vector<double>& gamma0, const std::vector<double>& g) {
    const ClippingSpec s = build_clipping(loss_of(kind, center.size()), CompactBall(to_point(center), radius), to_point(gamma0));
    return from_point(clip_point(s, to_point(g)));
  }, py::arg("kind"), py::arg("obs_center"), py::arg("obs_radius"), py::arg("gamma0"), py::arg("prediction"));

  m.def("clip_measure", [](const std::string& kind, const std::vector<double>& center, double radius,
                           const std::vector<double>& gamma0, const std::string& measure_json) {
    const ClippingSpec s = build_clipping(loss_of(kind, center.size()), CompactBall(to_point(center), radius), to_point(gamma0));
    return measure_to_json(clip_measure(s, measure_from_json(nlohmann::json::parse(measure_json)))).dump();
  }, py::arg("kind"), py::arg("obs_center"), py::arg("obs_radius"), py::arg("gamma0"), py::arg("measure_json"));

  m.def("format_double", &format_double, py::arg("value"));
}
