#include "dcda/bounds.hpp"
#include "dcda/channel.hpp"
#include "dcda/config.hpp"
#include "dcda/errors.hpp"
#include "dcda/experiment.hpp"
#include "dcda/prox.hpp"
#include "dcda/topology.hpp"
#include "dcda/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dcda;

namespace {

FeasibleSet parse_set(const std::string& name, double radius) {
  if (name == "unconstrained") return FeasibleSet::unconstrained();
  if (name == "ball") return FeasibleSet::l2_ball(radius);
  if (name == "simplex") return FeasibleSet::simplex();
  throw ConfigError("unknown feasible set '" + name + "' (expected unconstrained, ball or simplex)");
}

ProxKind parse_psi(const std::string& name) {
  if (name == "squared") return ProxKind::squared;
  if (name == "entropic") return ProxKind::entropic;
  throw ConfigError("unknown prox '" + name + "' (expected squared or entropic)");
}

ExperimentConfig config_from_text(const std::string& text) {
  ParseResult r = parse_config(text);
  if (!r.ok()) throw ConfigError(r.error_text());
  return *r.config;
}

// Trace columns as a dict of equal-length lists, ready for numpy or pandas.
py::dict trace_dict(const RunTrace& trace) {
  py::dict out;
  std::vector<long> t;
  std::vector<int> node;
  std::vector<long long> tx;
  std::vector<double> f_gap, dual, spread, gbar, alpha, acc, gnorm, xnorm, ynorm;
  for (const TraceRow& r : trace.rows) {
    t.push_back(r.t);
    node.push_back(r.node);
    f_gap.push_back(r.f_gap);
    dual.push_back(r.dual_consensus);
    spread.push_back(r.primal_spread);
    gbar.push_back(r.gbar_norm);
    alpha.push_back(r.alpha);
    acc.push_back(r.accuracy);
    gnorm.push_back(r.grad_norm);
    xnorm.push_back(r.x_norm);
    ynorm.push_back(r.y_norm);
    tx.push_back(r.transmissions);
  }
  out["t"] = t;
  out["node"] = node;
  out["f_gap"] = f_gap;
  out["dual_consensus"] = dual;
  out["primal_spread"] = spread;
  out["gbar_norm"] = gbar;
  out["alpha"] = alpha;
  out["accuracy"] = acc;
  out["grad_norm"] = gnorm;
  out["x_norm"] = xnorm;
  out["y_norm"] = ynorm;
  out["transmissions"] = tx;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed coordinate dual averaging simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("full_graph", [](int n) { return make_full(n).adjacency(); }, py::arg("n"));
  m.def("ring_graph", [](int n, int l) { return make_ring(n, l).adjacency(); }, py::arg("n"), py::arg("l") = 1);
  m.def("random_graph", [](int n, double p, std::uint64_t seed) { return make_random(n, p, seed).adjacency(); },
        py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("mixing_matrix", &mixing_from_adjacency, py::arg("adjacency"));
  m.def("sigma2", [](const Matrix& P) { return second_singular_value(P); }, py::arg("P"));

  m.def(
      "prox_project",
      [](const Vector& z, double alpha, const std::string& psi, const std::string& set, double radius) {
        return prox_project(z, alpha, parse_psi(psi), parse_set(set, radius));
      },
      py::arg("z"), py::arg("alpha"), py::arg("psi") = "squared", py::arg("set") = "unconstrained",
      py::arg("radius") = 1.0);
  m.def("quantize_delta", &quantize_delta, py::arg("delta"), py::arg("scale"), py::arg("dither"));

  m.def(
      "check_config",
      [](const std::string& text) {
        std::vector<std::pair<int, std::string>> out;
        for (const ConfigIssue& e : parse_config(text).errors) out.emplace_back(e.line, e.message);
        return out;
      },
      py::arg("text"), "List of (line, message) problems; empty when the config is valid.");
  m.def("canonical_config", [](const std::string& text) { return to_text(config_from_text(text)); },
        py::arg("text"));

  m.def(
      "run",
      [](const std::string& text) {
        const ExperimentConfig config = config_from_text(text);
        RunTrace trace;
        {
          py::gil_scoped_release release;
          trace = dcda_run(make_run_config(config));
        }
        py::dict out;
        out["trace"] = trace_dict(trace);
        out["x_hat"] = trace.x_hat;
        out["f_star"] = trace.reference.f_star;
        out["psi_star"] = trace.reference.psi_star;
        out["initial_gap"] = trace.initial_gap;
        out["metadata"] = trace.metadata;
        return out;
      },
      py::arg("config_text"), "Run one experiment from config text; no files are written.");

  m.def(
      "bounds",
      [](const std::string& text) {
        const ExperimentConfig config = config_from_text(text);
        BoundsTable table;
        {
          py::gil_scoped_release release;
          const RunTrace trace = dcda_run(make_run_config(config));
          table = evaluate_bounds(config, trace, trace.reference.psi_star);
        }
        py::dict out;
        std::vector<long> T;
        std::vector<int> node;
        std::vector<double> gap, thm1;
        std::vector<bool> violation;
        std::vector<std::vector<double>> lemmas(table.lemma_names.size());
        for (const BoundsRow& r : table.rows) {
          T.push_back(r.T);
          node.push_back(r.node);
          gap.push_back(r.gap);
          thm1.push_back(r.thm1);
          violation.push_back(r.violation);
          for (std::size_t l = 0; l < lemmas.size(); ++l) lemmas[l].push_back(r.lemmas[l]);
        }
        out["T"] = T;
        out["node"] = node;
        out["avg_gap"] = gap;
        out["thm1"] = thm1;
        for (std::size_t l = 0; l < lemmas.size(); ++l) out[py::str(table.lemma_names[l])] = lemmas[l];
        out["violation"] = violation;
        out["certificate_violations"] = table.certificate_violations;
        out["L"] = table.L;
        return out;
      },
      py::arg("config_text"), "Run one experiment and evaluate every applicable bound on its trace.");
}
