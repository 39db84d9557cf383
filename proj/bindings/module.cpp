#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linkopt/graph.hpp"
#include "linkopt/hits.hpp"
#include "linkopt/hots.hpp"
#include "linkopt/job.hpp"
#include "linkopt/spectral.hpp"

namespace py = pybind11;
using namespace linkopt;

namespace {

ObjectiveSpec objective_by_name(const std::string& name, const std::vector<int>& targets) {
  if (name == "target-sum-squares") return objectives::target_sum_squares(targets);
  if (name == "target-sum") return objectives::target_sum(targets);
  if (name == "target-sum-exp") return objectives::target_sum_exp(targets);
  if (name.rfind("coordinate:", 0) == 0)
    return objectives::coordinate(std::stoi(name.substr(11)));
  throw std::invalid_argument("unknown objective '" + name + "'");
}

NormalizationSpec normalization_by_name(const std::string& name, int n,
                                        const std::vector<int>& targets) {
  if (name == "l1") return NormalizationSpec::l1();
  if (name == "l2") return NormalizationSpec::l2();
  if (name == "weighted-l2") {
    std::vector<double> r(n, 0.0);
    for (int t : targets) r[t] = 1.0;
    return NormalizationSpec::weighted_l2(std::move(r));
  }
  if (name.rfind("coordinate:", 0) == 0)
    return NormalizationSpec::coordinate(std::stoi(name.substr(11)));
  throw std::invalid_argument("unknown normalization '" + name + "'");
}

HotsNorm hots_norm_by_name(const std::string& name) {
  if (name == "mean") return HotsNorm::MeanZero;
  if (name == "lse") return HotsNorm::LseZero;
  if (name == "lse-target") return HotsNorm::LseTargetZero;
  throw std::invalid_argument("unknown temperature normalization '" + name + "'");
}

py::dict trajectory_dict(const Trajectory& t, bool maximize) {
  py::dict d;
  const double sign = maximize ? -1.0 : 1.0;
  d["x"] = t.x_final;
  d["objective"] = sign * t.J_final;
  d["converged"] = t.converged;
  d["status"] = t.status;
  d["outer_steps"] = t.steps.size();
  d["inner_steps"] = t.total_inner;
  d["assemblies"] = t.total_assemblies;
  d["displacement"] = t.final_displacement;
  d["final_delta"] = t.final_delta;
  py::list js;
  for (const StepRecord& r : t.steps) js.append(sign * r.J_after);
  d["objective_path"] = js;
  return d;
}

}  // namespace

PYBIND11_MODULE(_linkopt, m) {
  m.doc() = "Ranking-vector optimization over link graphs (HITS authority, HOTS temperatures)";

  py::class_<Arc>(m, "Arc")
      .def(py::init<int, int>(), py::arg("src"), py::arg("dst"))
      .def_readonly("src", &Arc::src)
      .def_readonly("dst", &Arc::dst)
      .def("__repr__", [](const Arc& a) {
        return "Arc(" + std::to_string(a.src) + ", " + std::to_string(a.dst) + ")";
      });

  py::class_<LinkGraph>(m, "LinkGraph")
      .def_readonly("n", &LinkGraph::n)
      .def_readonly("obligatory", &LinkGraph::obligatory)
      .def_readonly("facultative", &LinkGraph::facultative)
      .def_readonly("target_set", &LinkGraph::target_set)
      .def("controlled_pages", &LinkGraph::controlled_pages)
      .def("serialize", [](const LinkGraph& g) { return serialize(g); });

  m.def(
      "parse_graph",
      [](const std::string& text, bool allow_self_links) {
        return parse_graph(text, {allow_self_links});
      },
      py::arg("text"), py::arg("allow_self_links") = false);
  m.def(
      "load_graph",
      [](const std::string& path, bool allow_self_links) {
        return load_graph(path, {allow_self_links});
      },
      py::arg("path"), py::arg("allow_self_links") = false);

  m.def("project_box", [](std::vector<double> x) {
    project_box_inplace(x);
    return x;
  });

  m.def(
      "rank",
      [](const LinkGraph& g, const std::string& algorithm, std::vector<double> weights,
         const std::string& normalization, double xi, double alpha, double tol) {
        WeightVector x;
        x.x = weights.empty() ? std::vector<double>(g.facultative.size(), 0.0) : std::move(weights);
        SparseMatrix a = assemble(g, x);
        py::dict out;
        if (algorithm == "hots") {
          HotsConfig hc;
          hc.alpha = alpha;
          hc.norm = hots_norm_by_name(normalization.empty() ? "lse" : normalization);
          hc.targets = g.target_set;
          hc.fp_tol = tol;
          HotsState st = hots_solve(a, {}, hc);
          std::vector<double> scores(st.p.size());
          for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = std::exp(st.p[i]);
          out["scores"] = scores;
          out["p"] = st.p;
          out["residual"] = st.residual;
          out["iterations"] = st.iterations;
          out["converged"] = st.converged;
          return out;
        }
        NormalizationSpec norm =
            normalization_by_name(algorithm == "hits" ? (normalization.empty() ? "l2" : normalization)
                                                      : (normalization.empty() ? "l1" : normalization),
                                  g.n, g.target_set);
        PowerResult pr;
        if (algorithm == "hits") {
          HitsOperator op(a, xi);
          pr = power_iterate(op, norm, tol, 10L * g.n + 1000);
        } else {
          CsrOperator op(a);
          pr = power_iterate(op, norm, tol, 10L * g.n + 1000);
        }
        out["scores"] = pr.u;
        out["rho"] = pr.rho;
        out["residual"] = pr.residual;
        out["iterations"] = pr.iterations;
        out["converged"] = pr.converged;
        return out;
      },
      py::arg("graph"), py::arg("algorithm") = "hits", py::arg("weights") = std::vector<double>{},
      py::arg("normalization") = "", py::arg("xi") = 1e-4, py::arg("alpha") = 0.9,
      py::arg("tol") = 1e-10);

  m.def(
      "optimize",
      [](const LinkGraph& g, const std::string& algorithm, std::vector<double> x0,
         const std::string& objective, const std::string& normalization, double xi, double alpha,
         const std::string& strategy, double stat_tol, double delta_tol, long max_outer) {
        if (x0.empty()) x0.assign(g.facultative.size(), 0.5);
        std::unique_ptr<ProblemAdapter> adapter;
        if (algorithm == "hits") {
          HitsProblem prob;
          prob.xi = xi;
          prob.normalization =
              normalization_by_name(normalization.empty() ? "l2" : normalization, g.n, g.target_set);
          prob.objective =
              objective_by_name(objective.empty() ? "target-sum-squares" : objective, g.target_set);
          adapter = std::make_unique<HitsAdapter>(g, std::move(prob), true);
        } else if (algorithm == "hots") {
          HotsConfig hc;
          hc.alpha = alpha;
          hc.norm = hots_norm_by_name(normalization.empty() ? "lse" : normalization);
          hc.targets = g.target_set;
          adapter = std::make_unique<HotsAdapter>(
              g, std::move(hc),
              objective_by_name(objective.empty() ? "target-sum-exp" : objective, g.target_set),
              true);
        } else {
          NormalizationSpec norm =
              normalization_by_name(normalization.empty() ? "l1" : normalization, g.n, g.target_set);
          adapter = std::make_unique<PerronAdapter>(
              g, objective_by_name(objective.empty() ? "target-sum" : objective, g.target_set),
              std::move(norm), true);
        }
        MasterParams mp;
        mp.stat_tol = stat_tol;
        mp.delta_tol = delta_tol;
        mp.max_outer = max_outer;
        ArmijoParams ap;
        Trajectory traj = strategy == "fixed"
                              ? fixed_precision_gradient(x0, *adapter, 1e-9, ap, stat_tol, max_outer)
                              : master_optimize(x0, *adapter, mp, ap);
        return trajectory_dict(traj, true);
      },
      py::arg("graph"), py::arg("algorithm") = "hits", py::arg("x0") = std::vector<double>{},
      py::arg("objective") = "", py::arg("normalization") = "", py::arg("xi") = 1e-4,
      py::arg("alpha") = 0.9, py::arg("strategy") = "master", py::arg("stat_tol") = 1e-6,
      py::arg("delta_tol") = 1e-6, py::arg("max_outer") = 100000);

  m.def(
      "theta",
      [](const LinkGraph& g, std::vector<double> weights, std::vector<double> p, double alpha) {
        WeightVector x;
        x.x = std::move(weights);
        SparseMatrix a = assemble(g, x);
        HotsConfig hc;
        hc.alpha = alpha;
        return theta(a, p, hc);
      },
      py::arg("graph"), py::arg("weights"), py::arg("p"), py::arg("alpha") = 0.9);

  m.def(
      "run_job",
      [](const py::dict& kw) {
        JobConfig cfg;
        auto gets = [&](const char* k, std::string& dst) {
          if (kw.contains(k)) dst = py::cast<std::string>(kw[k]);
        };
        gets("command", cfg.command);
        gets("graph", cfg.graph_path);
        gets("weights", cfg.weights_path);
        gets("algorithm", cfg.algorithm);
        gets("objective", cfg.objective);
        gets("normalization", cfg.normalization);
        gets("x0", cfg.x0);
        gets("out", cfg.out_dir);
        gets("strategy", cfg.strategy);
        if (kw.contains("xi")) cfg.xi = py::cast<double>(kw["xi"]);
        if (kw.contains("alpha")) cfg.alpha = py::cast<double>(kw["alpha"]);
        if (kw.contains("seed")) cfg.seed = py::cast<unsigned long long>(kw["seed"]);
        JobResult r = run_job(cfg);
        py::dict out;
        out["exit_code"] = r.exit_code;
        out["summary"] = r.summary;
        out["message"] = r.message;
        return out;
      },
      py::arg("config"));

  m.attr("__version__") = "0.1.0";
}
