#pragma once

#include <string>
#include <vector>

#include "gridqcqp/ac_model.hpp"
#include "gridqcqp/interior_point.hpp"
#include "gridqcqp/network.hpp"
#include "gridqcqp/powerflow.hpp"

namespace gridqcqp {

/// Solver settings for the OPF: objective in MW scaled by 1e-4.
inline InteriorPointOptions acopf_ipm_defaults() {
  InteriorPointOptions o;
  o.cost_scale = 1e-4;
  return o;
}

struct AcopfOptions {
  InteriorPointOptions ipm = acopf_ipm_defaults();
  /// Every generator costs 1 per MW (losses minimization). When false the
  /// linear coefficients from the case are used.
  bool unit_costs = true;
  /// Retry from the middle of the bounds if the first solve fails.
  bool restart_from_bounds = true;
};

struct AcopfResult {
  PfSolution point;
  InteriorPointStatus status = InteriorPointStatus::numerical_failure;
  bool degraded = false;
  /// The start was feasible and no better point was found.
  bool kept_start = false;
  double cost = 0.0;  // objective in cost units (MW for unit costs)
  /// Element bounds that cross (min > max), or aggregate capability short of
  /// the load. Non-empty means the solver was not run.
  std::vector<std::string> bound_crossings;
  ConstraintReport violations;
};

/// Local AC-OPF over bus voltages and generator outputs: minimizes linear
/// generation cost subject to the power balance at every bus, voltage and
/// generator bounds, and the branch limits of `mode`. The reference angle
/// is held at its value in `start`; angle-difference limits are ignored.
AcopfResult local_acopf(const Network& net, const PfSolution& start,
                        FlowLimit mode, const AcopfOptions& opts = {});
AcopfResult local_acopf(const Network& net, const AdmittanceModel& adm,
                        const PfSolution& start, FlowLimit mode,
                        const AcopfOptions& opts = {});

/// The AC-OPF as a generic program, variables [θ; m; Pg; Qg].
class AcopfProgram final : public NonlinearProgram {
 public:
  AcopfProgram(const Network& net, const AdmittanceModel& adm, FlowLimit mode,
               double ref_angle, bool unit_costs);

  Eigen::Index size() const override;
  Eigen::VectorXd lower_bounds() const override;
  Eigen::VectorXd upper_bounds() const override;
  double objective(const Eigen::VectorXd& x,
                   Eigen::VectorXd& grad) const override;
  void equalities(const Eigen::VectorXd& x, Eigen::VectorXd& g,
                  Eigen::SparseMatrix<double>& jac) const override;
  void inequalities(const Eigen::VectorXd& x, Eigen::VectorXd& h,
                    Eigen::SparseMatrix<double>& jac) const override;
  Eigen::SparseMatrix<double> lagrangian_hessian(
      const Eigen::VectorXd& x, double obj_weight, const Eigen::VectorXd& lam,
      const Eigen::VectorXd& mu) const override;

  Eigen::VectorXd pack(const PfSolution& sol) const;
  PfSolution unpack(const Eigen::VectorXd& x) const;

 private:
  PolarVoltage voltage(const Eigen::VectorXd& x) const;

  const Network& net_;
  const AdmittanceModel& adm_;
  BranchFlowSet flows_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd rate_sq_;
  double ref_angle_;
  Eigen::Index nb_, ng_;
};

}  // namespace gridqcqp
