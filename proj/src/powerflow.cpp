#include "gridqcqp/powerflow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

namespace gridqcqp {

BusClasses classify_buses(const Network& net) {
  BusClasses cls;
  cls.slack = net.slack;
  const auto has_gen = net.generator_bus_mask();
  for (const auto& b : net.buses) {
    if (b.index == net.slack) continue;
    const bool voltage_controlled =
        has_gen[b.index] && (b.type == BusType::pv || b.type == BusType::ref);
    (voltage_controlled ? cls.pv : cls.pq).push_back(b.index);
  }
  return cls;
}

namespace {

Eigen::VectorXcd initial_voltage(const Network& net, const BusClasses& cls,
                                 StartPoint start) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  Eigen::VectorXcd v(n);
  const double slack_angle = std::arg(net.buses[net.slack].v_stored);
  for (const auto& b : net.buses) {
    const auto i = static_cast<Eigen::Index>(b.index);
    v[i] = start == StartPoint::stored ? b.v_stored
                                       : std::polar(1.0, slack_angle);
  }
  // Voltage-controlled buses start at the first generator's set point.
  const auto by_bus = net.gens_by_bus();
  std::vector<std::size_t> controlled = cls.pv;
  controlled.push_back(cls.slack);
  for (const auto i : controlled) {
    if (by_bus[i].empty()) continue;
    const double vg = net.gens[by_bus[i].front()].vg;
    const auto ii = static_cast<Eigen::Index>(i);
    const double mag = std::abs(v[ii]);
    v[ii] = mag > 0.0 ? v[ii] * (vg / mag) : Complex(vg, 0.0);
  }
  return v;
}

Eigen::VectorXcd scheduled_injection(const Network& net) {
  Eigen::VectorXcd s(static_cast<Eigen::Index>(net.buses.size()));
  for (const auto& b : net.buses)
    s[static_cast<Eigen::Index>(b.index)] = Complex(-b.pd, -b.qd);
  for (const auto& g : net.gens)
    s[static_cast<Eigen::Index>(g.bus)] += Complex(g.pg, g.qg);
  return s;
}

}  // namespace

PfSolution solve_powerflow(const Network& net, const PowerFlowOptions& opts) {
  return solve_powerflow(net, build_admittance(net), opts);
}

PfSolution solve_powerflow(const Network& net, const AdmittanceModel& adm,
                           const PowerFlowOptions& opts) {
  const auto cls = classify_buses(net);
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  const Eigen::VectorXcd sbus = scheduled_injection(net);
  PolarVoltage v = PolarVoltage::from_complex(initial_voltage(net, cls, opts.start));

  // Unknowns: angles at pv+pq buses, magnitudes at pq buses.
  std::vector<std::size_t> pvpq = cls.pv;
  pvpq.insert(pvpq.end(), cls.pq.begin(), cls.pq.end());
  std::sort(pvpq.begin(), pvpq.end());
  std::vector<std::size_t> pq = cls.pq;
  std::sort(pq.begin(), pq.end());
  std::vector<Eigen::Index> angle_pos(static_cast<std::size_t>(n), -1),
      mag_pos(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < pvpq.size(); ++r)
    angle_pos[pvpq[r]] = static_cast<Eigen::Index>(r);
  for (std::size_t r = 0; r < pq.size(); ++r)
    mag_pos[pq[r]] = static_cast<Eigen::Index>(pvpq.size() + r);
  const auto nunk = static_cast<Eigen::Index>(pvpq.size() + pq.size());

  const auto mismatch = [&](const PolarVoltage& pv, Eigen::VectorXd& f) {
    Eigen::VectorXd p, q;
    injections(adm.ybus, pv, p, q);
    f.resize(nunk);
    for (std::size_t r = 0; r < pvpq.size(); ++r)
      f[static_cast<Eigen::Index>(r)] =
          p[static_cast<Eigen::Index>(pvpq[r])] - sbus[static_cast<Eigen::Index>(pvpq[r])].real();
    for (std::size_t r = 0; r < pq.size(); ++r)
      f[static_cast<Eigen::Index>(pvpq.size() + r)] =
          q[static_cast<Eigen::Index>(pq[r])] - sbus[static_cast<Eigen::Index>(pq[r])].imag();
  };

  PfSolution sol;
  Eigen::VectorXd f;
  mismatch(v, f);
  double norm_f = nunk > 0 ? f.lpNorm<Eigen::Infinity>() : 0.0;
  Eigen::SparseLU<SparseReal> lu;
  while (norm_f > opts.tol && sol.iterations < opts.max_iter) {
    const auto jac = injection_jacobian(adm.ybus, v);
    std::vector<Eigen::Triplet<double>> t;
    const auto gather = [&](const SparseReal& block, bool p_row, bool angle_col) {
      for (Eigen::Index c = 0; c < block.outerSize(); ++c)
        for (SparseReal::InnerIterator it(block, c); it; ++it) {
          const auto row_bus = static_cast<std::size_t>(it.row());
          const auto col_bus = static_cast<std::size_t>(it.col());
          const auto r = p_row ? angle_pos[row_bus] : mag_pos[row_bus];
          const auto cc = angle_col ? angle_pos[col_bus] : mag_pos[col_bus];
          if (r >= 0 && cc >= 0) t.emplace_back(r, cc, it.value());
        }
    };
    gather(jac.dp_dangle, true, true);
    gather(jac.dp_dmag, true, false);
    gather(jac.dq_dangle, false, true);
    gather(jac.dq_dmag, false, false);
    SparseReal j(nunk, nunk);
    j.setFromTriplets(t.begin(), t.end());
    lu.compute(j);
    if (lu.info() != Eigen::Success) {
      sol.diagnostics = "singular Jacobian at iteration " +
                        std::to_string(sol.iterations + 1) + ": " +
                        lu.lastErrorMessage();
      break;
    }
    const Eigen::VectorXd dx = lu.solve(-f);
    if (!dx.allFinite()) {
      sol.diagnostics = "non-finite Newton step at iteration " +
                        std::to_string(sol.iterations + 1);
      break;
    }
    for (std::size_t r = 0; r < pvpq.size(); ++r)
      v.angle[static_cast<Eigen::Index>(pvpq[r])] += dx[static_cast<Eigen::Index>(r)];
    for (std::size_t r = 0; r < pq.size(); ++r)
      v.magnitude[static_cast<Eigen::Index>(pq[r])] +=
          dx[static_cast<Eigen::Index>(pvpq.size() + r)];
    ++sol.iterations;
    mismatch(v, f);
    norm_f = f.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm_f)) {
      sol.diagnostics = "mismatch diverged";
      break;
    }
  }
  sol.converged = norm_f <= opts.tol;
  if (!sol.converged && sol.diagnostics.empty())
    sol.diagnostics = "iteration limit reached, max mismatch " +
                      std::to_string(norm_f);
  sol.max_mismatch = norm_f;
  sol.v = v.to_complex();

  // Generator outputs: scheduled values, except that voltage-controlled buses
  // supply whatever reactive power balances them and the slack bus also
  // supplies the residual active power.
  const auto ng = static_cast<Eigen::Index>(net.gens.size());
  sol.pg.resize(ng);
  sol.qg.resize(ng);
  for (Eigen::Index g = 0; g < ng; ++g) {
    sol.pg[g] = net.gens[static_cast<std::size_t>(g)].pg;
    sol.qg[g] = net.gens[static_cast<std::size_t>(g)].qg;
  }
  const Eigen::VectorXcd s = bus_injections(adm.ybus, sol.v);
  const auto by_bus = net.gens_by_bus();
  std::vector<std::size_t> controlled = cls.pv;
  controlled.push_back(cls.slack);
  for (const auto i : controlled) {
    const auto& gens = by_bus[i];
    if (gens.empty()) continue;
    const auto& bus = net.buses[i];
    const Complex needed = s[static_cast<Eigen::Index>(i)] + Complex(bus.pd, bus.qd);
    for (const auto g : gens)
      sol.qg[static_cast<Eigen::Index>(g)] =
          needed.imag() / static_cast<double>(gens.size());
    if (i == cls.slack) {
      double others = 0.0;
      for (std::size_t k = 1; k < gens.size(); ++k)
        others += sol.pg[static_cast<Eigen::Index>(gens[k])];
      sol.pg[static_cast<Eigen::Index>(gens.front())] = needed.real() - others;
    }
  }
  sol.objective_mw = net.base_mva * sol.pg.sum();
  return sol;
}

double ConstraintReport::worst() const {
  return std::max({worst_voltage, worst_gen_p, worst_gen_q, worst_flow});
}

ConstraintReport evaluate_feasible_point(const Network& net,
                                         const AdmittanceModel& adm,
                                         const PfSolution& sol, FlowLimit mode,
                                         double tol) {
  ConstraintReport rep;
  const auto note = [tol](std::vector<Violation>& list, double& worst,
                          std::string element, double amount) {
    if (amount > tol) list.push_back({std::move(element), amount});
    worst = std::max(worst, amount);
  };
  for (const auto& b : net.buses) {
    const double vm = std::abs(sol.v[static_cast<Eigen::Index>(b.index)]);
    const double excess = std::max(vm - b.vmax, b.vmin - vm);
    note(rep.voltage, rep.worst_voltage, "bus " + std::to_string(b.id), excess);
  }
  for (std::size_t g = 0; g < net.gens.size(); ++g) {
    const auto& gen = net.gens[g];
    const auto gi = static_cast<Eigen::Index>(g);
    const std::string name = "gen row " + std::to_string(gen.source_row + 1);
    note(rep.gen_p, rep.worst_gen_p, name,
         std::max(sol.pg[gi] - gen.pmax, gen.pmin - sol.pg[gi]));
    note(rep.gen_q, rep.worst_gen_q, name,
         std::max(sol.qg[gi] - gen.qmax, gen.qmin - sol.qg[gi]));
  }
  if (mode != FlowLimit::none) {
    const Eigen::VectorXcd i_from = adm.yf * sol.v;
    const Eigen::VectorXcd i_to = adm.yt * sol.v;
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
      const auto& br = net.branches[k];
      if (!(br.rate > 0.0)) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      double from = std::abs(i_from[kk]), to = std::abs(i_to[kk]);
      if (mode == FlowLimit::apparent_power) {
        from *= std::abs(sol.v[static_cast<Eigen::Index>(br.from)]);
        to *= std::abs(sol.v[static_cast<Eigen::Index>(br.to)]);
      }
      const std::string name = "branch row " + std::to_string(br.source_row + 1);
      note(rep.flow, rep.worst_flow, name + " (from)", from - br.rate);
      note(rep.flow, rep.worst_flow, name + " (to)", to - br.rate);
    }
  }
  return rep;
}

double branch_losses(const Network& net, const AdmittanceModel& adm,
                     const Eigen::VectorXcd& v) {
  Eigen::VectorXcd sf, st;
  branch_powers(net, adm, v, sf, st);
  return (sf + st).real().sum();
}

}  // namespace gridqcqp
