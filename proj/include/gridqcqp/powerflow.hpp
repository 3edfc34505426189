#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridqcqp/ac_model.hpp"
#include "gridqcqp/network.hpp"

namespace gridqcqp {

enum class StartPoint { flat, stored };

struct PowerFlowOptions {
  StartPoint start = StartPoint::stored;
  double tol = 1e-8;  // max |mismatch|, pu
  int max_iter = 30;
};

/// Operating point: bus voltages plus generator outputs.
struct PfSolution {
  Eigen::VectorXcd v;
  Eigen::VectorXd pg, qg;  // per in-service generator, pu
  bool converged = false;
  double max_mismatch = 0.0;  // pu
  double objective_mw = 0.0;  // base_mva * sum(pg)
  int iterations = 0;
  std::string diagnostics;
};

/// Newton-Raphson power flow in polar coordinates. The slack bus holds its
/// voltage and absorbs the residual P and Q; generator buses typed PV hold
/// Vm and Pg. Reactive limits are not enforced.
///
/// A singular Jacobian or the iteration limit yields converged == false with
/// a diagnostic message rather than an exception.
PfSolution solve_powerflow(const Network& net, const AdmittanceModel& adm,
                           const PowerFlowOptions& opts = {});
PfSolution solve_powerflow(const Network& net,
                           const PowerFlowOptions& opts = {});

/// Bus classification used by the power flow.
struct BusClasses {
  std::vector<std::size_t> pv, pq;
  std::size_t slack = 0;
};
BusClasses classify_buses(const Network& net);

/// Worst bound excess found in one class of constraints.
struct Violation {
  std::string element;   // e.g. "bus 913", "gen row 4", "branch row 17 (to)"
  double amount = 0.0;   // pu beyond the bound
};

struct ConstraintReport {
  std::vector<Violation> voltage, gen_p, gen_q, flow;
  double worst_voltage = 0.0, worst_gen_p = 0.0, worst_gen_q = 0.0,
         worst_flow = 0.0;

  double worst() const;
  bool empty() const {
    return voltage.empty() && gen_p.empty() && gen_q.empty() && flow.empty();
  }
};

/// Bound violations of an operating point. Flow limits use |S| (apparent
/// power) or |I| (current, rateA / base_mva at 1 pu) on both branch ends, or
/// are skipped for FlowLimit::none. Only excesses above `tol` are listed.
ConstraintReport evaluate_feasible_point(const Network& net,
                                         const AdmittanceModel& adm,
                                         const PfSolution& sol, FlowLimit mode,
                                         double tol = 0.0);

/// Active power lost in the branches, sum Re(S_from + S_to), pu.
double branch_losses(const Network& net, const AdmittanceModel& adm,
                     const Eigen::VectorXcd& v);

}  // namespace gridqcqp
