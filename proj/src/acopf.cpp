#include "gridqcqp/acopf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

namespace {

using Eigen::Index;
using Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

AcopfProgram::AcopfProgram(const Network& net, const AdmittanceModel& adm,
                           FlowLimit mode, double ref_angle, bool unit_costs)
    : net_(net),
      adm_(adm),
      ref_angle_(ref_angle),
      nb_(static_cast<Index>(net.buses.size())),
      ng_(static_cast<Index>(net.gens.size())) {
  flows_.mode = mode;
  if (mode != FlowLimit::none)
    for (std::size_t k = 0; k < net.branches.size(); ++k)
      if (net.branches[k].rate > 0.0) flows_.limited.push_back(k);
  rate_sq_.resize(2 * static_cast<Index>(flows_.limited.size()));
  for (std::size_t r = 0; r < flows_.limited.size(); ++r) {
    const double rate = net.branches[flows_.limited[r]].rate;
    rate_sq_[2 * static_cast<Index>(r)] = rate * rate;
    rate_sq_[2 * static_cast<Index>(r) + 1] = rate * rate;
  }
  cost_.resize(ng_);
  for (Index g = 0; g < ng_; ++g)
    cost_[g] = unit_costs ? 1.0 : net.gens[static_cast<std::size_t>(g)].cost;
}

Index AcopfProgram::size() const { return 2 * nb_ + 2 * ng_; }

VectorXd AcopfProgram::lower_bounds() const {
  VectorXd lo(size());
  lo.head(nb_).setConstant(-kInf);
  lo[static_cast<Index>(net_.slack)] = ref_angle_;
  for (const auto& b : net_.buses) lo[nb_ + static_cast<Index>(b.index)] = b.vmin;
  for (Index g = 0; g < ng_; ++g) {
    lo[2 * nb_ + g] = net_.gens[static_cast<std::size_t>(g)].pmin;
    lo[2 * nb_ + ng_ + g] = net_.gens[static_cast<std::size_t>(g)].qmin;
  }
  return lo;
}

VectorXd AcopfProgram::upper_bounds() const {
  VectorXd hi(size());
  hi.head(nb_).setConstant(kInf);
  hi[static_cast<Index>(net_.slack)] = ref_angle_;
  for (const auto& b : net_.buses) hi[nb_ + static_cast<Index>(b.index)] = b.vmax;
  for (Index g = 0; g < ng_; ++g) {
    hi[2 * nb_ + g] = net_.gens[static_cast<std::size_t>(g)].pmax;
    hi[2 * nb_ + ng_ + g] = net_.gens[static_cast<std::size_t>(g)].qmax;
  }
  return hi;
}

PolarVoltage AcopfProgram::voltage(const VectorXd& x) const {
  return {x.head(nb_), x.segment(nb_, nb_)};
}

double AcopfProgram::objective(const VectorXd& x, VectorXd& grad) const {
  grad = VectorXd::Zero(size());
  grad.segment(2 * nb_, ng_) = net_.base_mva * cost_;
  return net_.base_mva * cost_.dot(x.segment(2 * nb_, ng_));
}

void AcopfProgram::equalities(const VectorXd& x, VectorXd& g,
                              Sparse& jac) const {
  const PolarVoltage v = voltage(x);
  VectorXd p, q;
  injections(adm_.ybus, v, p, q);
  g.resize(2 * nb_);
  for (const auto& b : net_.buses) {
    const auto i = static_cast<Index>(b.index);
    g[i] = p[i] + b.pd;
    g[nb_ + i] = q[i] + b.qd;
  }
  std::vector<Eigen::Triplet<double>> t;
  for (Index k = 0; k < ng_; ++k) {
    const auto i = static_cast<Index>(net_.gens[static_cast<std::size_t>(k)].bus);
    g[i] -= x[2 * nb_ + k];
    g[nb_ + i] -= x[2 * nb_ + ng_ + k];
    t.emplace_back(i, 2 * nb_ + k, -1.0);
    t.emplace_back(nb_ + i, 2 * nb_ + ng_ + k, -1.0);
  }
  const auto jac_blocks = injection_jacobian(adm_.ybus, v);
  const auto put = [&t](const Sparse& m, Index r0, Index c0) {
    for (Index c = 0; c < m.outerSize(); ++c)
      for (Sparse::InnerIterator it(m, c); it; ++it)
        t.emplace_back(it.row() + r0, it.col() + c0, it.value());
  };
  put(jac_blocks.dp_dangle, 0, 0);
  put(jac_blocks.dp_dmag, 0, nb_);
  put(jac_blocks.dq_dangle, nb_, 0);
  put(jac_blocks.dq_dmag, nb_, nb_);
  jac.resize(2 * nb_, size());
  jac.setFromTriplets(t.begin(), t.end());
}

void AcopfProgram::inequalities(const VectorXd& x, VectorXd& h,
                                Sparse& jac) const {
  if (flows_.limited.empty()) {
    h.resize(0);
    jac.resize(0, size());
    return;
  }
  auto f = branch_flows(net_, adm_, flows_, voltage(x));
  h = f.value - rate_sq_;
  jac = std::move(f.jacobian);
  jac.conservativeResize(jac.rows(), size());
}

Sparse AcopfProgram::lagrangian_hessian(const VectorXd& x, double /*obj_weight*/,
                                        const VectorXd& lam,
                                        const VectorXd& mu) const {
  const PolarVoltage v = voltage(x);
  Sparse hess = injection_hessian(adm_.ybus, v, lam.head(nb_), lam.tail(nb_));
  if (!flows_.limited.empty() && mu.size() > 0)
    hess += branch_flow_hessian(net_, adm_, flows_, v, mu);
  hess.conservativeResize(size(), size());
  return hess;
}

VectorXd AcopfProgram::pack(const PfSolution& sol) const {
  VectorXd x(size());
  const PolarVoltage v = PolarVoltage::from_complex(sol.v);
  x.head(nb_) = v.angle;
  x.segment(nb_, nb_) = v.magnitude;
  x.segment(2 * nb_, ng_) = sol.pg;
  x.tail(ng_) = sol.qg;
  return x;
}

PfSolution AcopfProgram::unpack(const VectorXd& x) const {
  PfSolution sol;
  sol.v = voltage(x).to_complex();
  sol.pg = x.segment(2 * nb_, ng_);
  sol.qg = x.tail(ng_);
  sol.objective_mw = net_.base_mva * sol.pg.sum();
  VectorXd g;
  Sparse jac;
  equalities(x, g, jac);
  sol.max_mismatch = g.size() > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
  return sol;
}

namespace {

std::vector<std::string> find_bound_crossings(const Network& net) {
  std::vector<std::string> out;
  double pmax = 0.0, load = 0.0;
  for (const auto& b : net.buses) {
    load += b.pd;
    if (b.vmin > b.vmax)
      out.push_back("bus " + std::to_string(b.id) + ": Vmin " +
                    format_number(b.vmin) + " > Vmax " + format_number(b.vmax));
  }
  for (const auto& g : net.gens) {
    pmax += g.pmax;
    const std::string name = "gen row " + std::to_string(g.source_row + 1);
    if (g.pmin > g.pmax) out.push_back(name + ": Pmin > Pmax");
    if (g.qmin > g.qmax) out.push_back(name + ": Qmin > Qmax");
  }
  if (pmax < load)
    out.push_back("aggregate Pmax " + format_fixed(pmax * net.base_mva, 1) +
                  " MW below total load " + format_fixed(load * net.base_mva, 1) +
                  " MW");
  return out;
}

PfSolution mid_bounds_start(const Network& net, const PfSolution& start) {
  PfSolution s = start;
  const double ref = std::arg(start.v[static_cast<Index>(net.slack)]);
  for (const auto& b : net.buses)
    s.v[static_cast<Index>(b.index)] = std::polar(0.5 * (b.vmin + b.vmax), ref);
  for (std::size_t g = 0; g < net.gens.size(); ++g) {
    const auto& gen = net.gens[g];
    s.pg[static_cast<Index>(g)] = 0.5 * (gen.pmin + gen.pmax);
    s.qg[static_cast<Index>(g)] = 0.5 * (gen.qmin + gen.qmax);
  }
  return s;
}

/// Moves a start inside the variable bounds.
VectorXd clip(VectorXd x, const VectorXd& lo, const VectorXd& hi) {
  for (Index i = 0; i < x.size(); ++i) {
    if (lo[i] == hi[i]) continue;
    x[i] = std::clamp(x[i], lo[i], hi[i]);
  }
  return x;
}

}  // namespace

AcopfResult local_acopf(const Network& net, const PfSolution& start,
                        FlowLimit mode, const AcopfOptions& opts) {
  return local_acopf(net, build_admittance(net), start, mode, opts);
}

AcopfResult local_acopf(const Network& net, const AdmittanceModel& adm,
                        const PfSolution& start, FlowLimit mode,
                        const AcopfOptions& opts) {
  AcopfResult out;
  out.point = start;
  out.bound_crossings = find_bound_crossings(net);
  if (!out.bound_crossings.empty()) {
    out.point.converged = false;
    out.point.diagnostics = "bounds cross; solver not run";
    return out;
  }

  const double ref = std::arg(start.v[static_cast<Index>(net.slack)]);
  const AcopfProgram prog(net, adm, mode, ref, opts.unit_costs);
  const VectorXd lo = prog.lower_bounds(), hi = prog.upper_bounds();

  auto run = [&](const PfSolution& from) {
    return solve_interior_point(prog, clip(prog.pack(from), lo, hi), opts.ipm);
  };
  InteriorPointResult res = run(start);
  if (!res.ok() && opts.restart_from_bounds) {
    auto retry = run(mid_bounds_start(net, start));
    retry.iterations += res.iterations;
    if (retry.ok() || (res.degraded && retry.degraded &&
                       retry.objective < res.objective) ||
        (!res.degraded && retry.degraded))
      res = std::move(retry);
  }

  out.status = res.status;
  out.degraded = res.degraded;
  out.cost = res.objective;
  out.point = prog.unpack(res.x);
  out.point.iterations = res.iterations;
  out.point.converged = res.ok() && !res.degraded;
  out.point.diagnostics = to_string(res.status);
  if (res.degraded) out.point.diagnostics += "; best feasible iterate returned";

  // Never hand back something worse than a feasible start.
  VectorXd grad;
  const double start_cost = prog.objective(prog.pack(start), grad);
  const bool start_feasible =
      start.converged && start.max_mismatch <= opts.ipm.feastol &&
      evaluate_feasible_point(net, adm, start, mode, opts.ipm.feastol).empty();
  if (start_feasible && (!res.ok() || start_cost < out.cost)) {
    out.point = start;
    out.point.iterations = res.iterations;
    out.point.diagnostics = "start kept: " + to_string(res.status);
    out.cost = start_cost;
    out.kept_start = true;
  }
  out.violations = evaluate_feasible_point(net, adm, out.point, mode,
                                           opts.ipm.feastol);
  return out;
}

}  // namespace gridqcqp
