#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gridqcqp/network.hpp"

namespace gridqcqp {

using SparseReal = Eigen::SparseMatrix<double>;

/// Bus voltages in polar form.
struct PolarVoltage {
  Eigen::VectorXd angle;      // radians
  Eigen::VectorXd magnitude;  // pu

  static PolarVoltage from_complex(const Eigen::VectorXcd& v);
  Eigen::VectorXcd to_complex() const;
};

/// First derivatives of the bus injections P(θ, m) and Q(θ, m).
struct InjectionJacobian {
  SparseReal dp_dangle, dp_dmag, dq_dangle, dq_dmag;  // each nbus x nbus
};

/// Active and reactive bus injections, P + jQ = diag(V) conj(Ybus V).
void injections(const SparseComplex& ybus, const PolarVoltage& v,
                Eigen::VectorXd& p, Eigen::VectorXd& q);

InjectionJacobian injection_jacobian(const SparseComplex& ybus,
                                     const PolarVoltage& v);

/// Hessian of sum_i (lam_p[i] P_i + lam_q[i] Q_i) over the stacked variables
/// [θ; m], as a 2n x 2n matrix.
SparseReal injection_hessian(const SparseComplex& ybus, const PolarVoltage& v,
                             const Eigen::VectorXd& lam_p,
                             const Eigen::VectorXd& lam_q);

enum class FlowLimit { apparent_power, current, none };

/// Squared branch-end flow quantities used as limits: |S|² for
/// apparent_power, |I|² for current. Both ends of every branch listed in
/// `limited` are evaluated (2 rows per branch: from end, then to end).
struct BranchFlowSet {
  std::vector<std::size_t> limited;  // branch indices with a finite rating
  FlowLimit mode = FlowLimit::none;
};

struct BranchFlowValues {
  Eigen::VectorXd value;  // 2 * limited.size()
  SparseReal jacobian;    // rows x 2n over [θ; m]
};

BranchFlowValues branch_flows(const Network& net, const AdmittanceModel& adm,
                              const BranchFlowSet& set, const PolarVoltage& v);

/// Hessian of sum_r mu[r] * flow_r over [θ; m].
SparseReal branch_flow_hessian(const Network& net, const AdmittanceModel& adm,
                               const BranchFlowSet& set, const PolarVoltage& v,
                               const Eigen::VectorXd& mu);

/// Complex power entering each branch at its from and to ends.
void branch_powers(const Network& net, const AdmittanceModel& adm,
                   const Eigen::VectorXcd& v, Eigen::VectorXcd& s_from,
                   Eigen::VectorXcd& s_to);

}  // namespace gridqcqp
