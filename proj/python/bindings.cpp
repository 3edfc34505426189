#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gridqcqp/acopf.hpp"
#include "gridqcqp/dcopf_bound.hpp"
#include "gridqcqp/errors.hpp"
#include "gridqcqp/matpower_io.hpp"
#include "gridqcqp/network.hpp"
#include "gridqcqp/pipeline.hpp"
#include "gridqcqp/powerflow.hpp"
#include "gridqcqp/qcqp.hpp"
#include "gridqcqp/stats.hpp"

namespace py = pybind11;
using namespace gridqcqp;

namespace {

/// Case file plus the network built from it.
struct Case {
  CaseData data;
  Network net;

  explicit Case(CaseData d) : data(std::move(d)), net(build_network(data)) {}
};

Eigen::MatrixXd table_array(const Table& t) {
  if (t.rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()),
                    static_cast<Eigen::Index>(t.rows.front().size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
  return m;
}

py::dict stats_dict(const CaseStats& s) {
  py::dict d;
  d["case"] = s.case_name;
  d["buses"] = s.n_bus;
  d["generators"] = s.n_gen;
  d["branches"] = s.n_branch;
  d["transformers"] = s.n_transformer;
  d["voltage_levels"] = std::vector<std::size_t>(s.voltage_histogram.begin(),
                                                 s.voltage_histogram.end());
  d["negative_r"] = s.n_neg_r;
  d["negative_x"] = s.n_neg_x;
  d["total_load_mw"] = s.total_load_mw;
  return d;
}

py::dict pf_dict(const PfSolution& sol) {
  py::dict d;
  d["converged"] = sol.converged;
  d["v"] = sol.v;
  d["pg"] = sol.pg;
  d["qg"] = sol.qg;
  d["max_mismatch"] = sol.max_mismatch;
  d["objective_mw"] = sol.objective_mw;
  d["iterations"] = sol.iterations;
  d["diagnostics"] = sol.diagnostics;
  return d;
}

PfSolution pf_from(const Network& net, const Eigen::VectorXcd& v,
                   const Eigen::VectorXd& pg, const Eigen::VectorXd& qg) {
  if (v.size() != static_cast<Eigen::Index>(net.buses.size()) ||
      pg.size() != static_cast<Eigen::Index>(net.gens.size()) ||
      qg.size() != pg.size())
    throw DimensionError("start point does not match the network");
  PfSolution s;
  s.v = v;
  s.pg = pg;
  s.qg = qg;
  s.converged = true;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Power grid cases, bounds on the AC-OPF and their QCQP form.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<StructureError>(m, "StructureError", base.ptr());
  py::register_exception<UnsupportedFormatError>(m, "UnsupportedFormatError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<InfeasibleBoundError>(m, "InfeasibleBoundError", base.ptr());
  py::register_exception<UndefinedGapError>(m, "UndefinedGapError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  py::enum_<FlowLimit>(m, "FlowLimit")
      .value("S", FlowLimit::apparent_power)
      .value("I", FlowLimit::current)
      .value("none", FlowLimit::none);
  py::enum_<Representation>(m, "Representation")
      .value("complex", Representation::complex_hermitian)
      .value("real", Representation::real_symmetric);

  py::class_<Case>(m, "Case")
      .def_property_readonly("name", [](const Case& c) { return c.data.name; })
      .def_property_readonly("base_mva", [](const Case& c) { return c.data.base_mva; })
      .def_property_readonly("bus", [](const Case& c) { return table_array(c.data.bus); })
      .def_property_readonly("gen", [](const Case& c) { return table_array(c.data.gen); })
      .def_property_readonly("branch",
                             [](const Case& c) { return table_array(c.data.branch); })
      .def_property_readonly("warnings", [](const Case& c) { return c.net.warnings; })
      .def("to_matpower", [](const Case& c) { return write_case(c.data); },
           "Case file text in MATPOWER format.")
      .def("clamp_negative_pmin",
           [](const Case& c) {
             auto [out, n] = clamp_negative_pmin(c.data);
             return py::make_tuple(Case(std::move(out)), n);
           },
           "Copy with every negative Pmin raised to 0, and the number changed.")
      .def("__repr__", [](const Case& c) {
        return "<Case " + c.data.name + ": " + std::to_string(c.net.buses.size()) + " buses>";
      });

  m.def("load_case", [](const std::filesystem::path& p) { return Case(load_case_file(p)); },
        py::arg("path"), "Read a MATPOWER case file.");
  m.def("parse_case", [](const std::string& text) { return Case(parse_case(text)); },
        py::arg("text"));

  m.def("stats", [](const Case& c) { return stats_dict(compute_stats(c.net, c.data)); },
        py::arg("case"), "Counts of the general figures and voltage level tables.");

  m.def("admittance",
        [](const Case& c) {
          return Eigen::SparseMatrix<Complex>(build_admittance(c.net).ybus);
        },
        py::arg("case"), "Bus admittance matrix (scipy.sparse).");

  m.def("dcopf_bound",
        [](const Case& c, bool unit) {
          const auto lb = dcopf_no_flow_limits(c.net, unit ? unit_costs(c.net)
                                                           : network_costs(c.net));
          py::dict d;
          d["value"] = lb.value;
          d["valid"] = lb.valid;
          d["reason"] = lb.reason;
          d["dispatch_mw"] = lb.dispatch_mw;
          return d;
        },
        py::arg("case"), py::arg("unit_costs") = true,
        "DC dispatch without flow limits, a lower bound on the AC objective.");

  m.def("gap_percent",
        [](double lb, double ub, bool valid) -> std::optional<double> {
          LowerBound b;
          b.value = lb;
          b.valid = valid;
          return gap_percent(b, ub);
        },
        py::arg("lower"), py::arg("upper"), py::arg("valid") = true,
        "100 (ub - lb) / lb, or None when the bound is not valid.");

  m.def("power_flow",
        [](const Case& c, double tol, int max_iter, bool flat) {
          PowerFlowOptions o;
          o.tol = tol;
          o.max_iter = max_iter;
          o.start = flat ? StartPoint::flat : StartPoint::stored;
          return pf_dict(solve_powerflow(c.net, o));
        },
        py::arg("case"), py::arg("tol") = 1e-8, py::arg("max_iter") = 30,
        py::arg("flat_start") = false);

  m.def("local_acopf",
        [](const Case& c, FlowLimit mode, double feastol, double opttol, double xtol,
           int max_iter) {
          AcopfOptions o;
          o.ipm.feastol = feastol;
          o.ipm.opttol = opttol;
          o.ipm.xtol = xtol;
          o.ipm.max_iter = max_iter;
          const auto adm = build_admittance(c.net);
          const auto start = solve_powerflow(c.net, adm);
          AcopfResult r;
          {
            py::gil_scoped_release release;
            r = local_acopf(c.net, adm, start, mode, o);
          }
          py::dict d = pf_dict(r.point);
          d["status"] = to_string(r.status);
          d["cost"] = r.cost;
          d["degraded"] = r.degraded;
          d["kept_start"] = r.kept_start;
          d["bound_crossings"] = r.bound_crossings;
          d["feasible"] = r.violations.empty();
          return d;
        },
        py::arg("case"), py::arg("flow_mode") = FlowLimit::none, py::arg("feastol") = 5e-6,
        py::arg("opttol") = 1e-4, py::arg("xtol") = 1e-8, py::arg("max_iter") = 1000,
        "Local AC-OPF with unit costs, started from the power flow point.");

  m.def("check_point",
        [](const Case& c, const Eigen::VectorXcd& v, const Eigen::VectorXd& pg,
           const Eigen::VectorXd& qg, FlowLimit mode) {
          const auto rep = evaluate_feasible_point(c.net, build_admittance(c.net),
                                                   pf_from(c.net, v, pg, qg), mode);
          py::dict d;
          d["voltage"] = rep.worst_voltage;
          d["gen_p"] = rep.worst_gen_p;
          d["gen_q"] = rep.worst_gen_q;
          d["flow"] = rep.worst_flow;
          d["feasible"] = rep.empty();
          return d;
        },
        py::arg("case"), py::arg("v"), py::arg("pg"), py::arg("qg"),
        py::arg("flow_mode") = FlowLimit::none, "Worst bound excess per constraint class, pu.");

  py::class_<QcqpProblem>(m, "Qcqp")
      .def_readonly("n_var", &QcqpProblem::n_var)
      .def_readonly("constant", &QcqpProblem::constant)
      .def_readonly("eq_rhs", &QcqpProblem::eq_rhs)
      .def_readonly("ineq_rhs", &QcqpProblem::ineq_rhs)
      .def_readonly("bus_ids", &QcqpProblem::bus_ids)
      .def_property_readonly("n_eq", [](const QcqpProblem& p) { return p.eq.size(); })
      .def_property_readonly("n_ineq", [](const QcqpProblem& p) { return p.ineq.size(); })
      .def_property_readonly("representation",
                             [](const QcqpProblem& p) { return p.representation; })
      .def("size",
           [](const QcqpProblem& p) {
             const auto s = qcqp_size(p);
             py::dict d;
             d["n_var"] = s.n_var;
             d["n_eq"] = s.n_eq;
             d["n_ineq"] = s.n_ineq;
             d["coupled_positions"] = s.coupled_positions;
             d["sparsity_percent"] = s.sparsity_percent;
             return d;
           })
      .def("evaluate",
           [](const QcqpProblem& p, const Eigen::VectorXcd& x) {
             const auto e = p.representation == Representation::real_symmetric
                                ? evaluate(p, Eigen::VectorXd(x.real()))
                                : evaluate(p, x);
             return py::make_tuple(e.objective, e.eq_residual, e.ineq_slack);
           },
           py::arg("x"), "(objective, equality residuals, inequality slacks) at x.")
      .def("to_text", &export_qcqp)
      .def("to_sdpa", &export_shor_sdpa, "Shor relaxation in SDPA sparse format.")
      .def("__eq__", [](const QcqpProblem& a, const QcqpProblem& b) { return a == b; });

  m.def("build_qcqp",
        [](const Case& c, Representation repr) { return build_qcqp(c.net, repr); },
        py::arg("case"), py::arg("representation") = Representation::real_symmetric);
  m.def("parse_qcqp", [](const std::string& text) { return parse_qcqp(text); },
        py::arg("text"));
  m.def("real_candidate", &real_candidate, py::arg("v"),
        "[Re v; Im v], the real-representation variable for voltages v.");

  m.def("run_pipeline",
        [](const std::vector<std::string>& paths, bool bounds, bool all_modes, bool qcqp,
           bool sdpa, bool profiles, FlowLimit flow_mode, Representation repr,
           const std::string& out_dir, unsigned jobs) {
          PipelineConfig cfg;
          cfg.stages.bounds = bounds || all_modes;
          cfg.stages.all_flow_modes = all_modes;
          cfg.stages.qcqp = qcqp;
          cfg.stages.sdpa = sdpa;
          cfg.stages.profiles = profiles;
          cfg.flow_mode = flow_mode;
          cfg.repr = repr;
          cfg.out_dir = out_dir;
          cfg.jobs = jobs;
          PipelineResult res;
          {
            py::gil_scoped_release release;
            res = run_pipeline(paths, cfg);
          }
          return py::make_tuple(render_json(res.ledgers, res.failures),
                                render_tables(res.ledgers, TableFormat::text),
                                res.exit_status());
        },
        py::arg("paths"), py::kw_only(), py::arg("bounds") = false,
        py::arg("all_modes") = false, py::arg("qcqp") = false, py::arg("sdpa") = false,
        py::arg("profiles") = false, py::arg("flow_mode") = FlowLimit::none,
        py::arg("representation") = Representation::real_symmetric, py::arg("out_dir") = "",
        py::arg("jobs") = 1u, "Batch run; returns (ledger JSON, text tables, exit status).");
}
