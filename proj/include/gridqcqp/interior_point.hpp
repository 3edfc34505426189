#pragma once

#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace gridqcqp {

/// Smooth nonlinear program
///
///   min f(x)  s.t.  g(x) = 0,  h(x) <= 0,  xmin <= x <= xmax.
///
/// Jacobians are stored row-wise: one row per constraint, one column per
/// variable.
class NonlinearProgram {
 public:
  virtual ~NonlinearProgram() = default;

  virtual Eigen::Index size() const = 0;
  virtual Eigen::VectorXd lower_bounds() const = 0;
  virtual Eigen::VectorXd upper_bounds() const = 0;

  virtual double objective(const Eigen::VectorXd& x,
                           Eigen::VectorXd& grad) const = 0;
  virtual void equalities(const Eigen::VectorXd& x, Eigen::VectorXd& g,
                          Eigen::SparseMatrix<double>& jac) const = 0;
  virtual void inequalities(const Eigen::VectorXd& x, Eigen::VectorXd& h,
                            Eigen::SparseMatrix<double>& jac) const = 0;

  /// Hessian of obj_weight f + lamᵀg + muᵀh. The full symmetric matrix is
  /// expected.
  virtual Eigen::SparseMatrix<double> lagrangian_hessian(
      const Eigen::VectorXd& x, double obj_weight, const Eigen::VectorXd& lam,
      const Eigen::VectorXd& mu) const = 0;
};

struct InteriorPointOptions {
  double feastol = 5e-6;  // absolute, max constraint violation
  double opttol = 1e-4;   // scaled Lagrangian gradient
  double comptol = 1e-6;
  double costtol = 1e-6;
  double xtol = 1e-8;     // relative step length
  int max_iter = 1000;
  double barrier_reduction = 0.2;
  double cost_scale = 1.0;  // objective multiplier seen by the solver
  double step_fraction = 0.99995;
  /// Return immediately when the start already satisfies the KKT conditions.
  bool check_start = true;
};

enum class InteriorPointStatus {
  converged,
  start_optimal,
  step_too_small,
  iteration_limit,
  numerical_failure,
};

std::string to_string(InteriorPointStatus s);

struct InteriorPointResult {
  InteriorPointStatus status = InteriorPointStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;  // unscaled f(x)
  Eigen::VectorXd lam;     // equality multipliers (without bound rows)
  Eigen::VectorXd mu;      // inequality multipliers (without bound rows)
  int iterations = 0;
  double feas_cond = 0.0, grad_cond = 0.0, comp_cond = 0.0;
  /// Set when the returned x is the best feasible iterate rather than the
  /// converged one.
  bool degraded = false;

  bool ok() const {
    return status == InteriorPointStatus::converged ||
           status == InteriorPointStatus::start_optimal ||
           status == InteriorPointStatus::step_too_small;
  }
};

/// Primal-dual interior point method with a predictor-free barrier update.
/// Bounds with xmin == xmax become equality rows; other finite bounds become
/// inequality rows. The KKT system is solved with a sparse LU factorization.
InteriorPointResult solve_interior_point(const NonlinearProgram& nlp,
                                         const Eigen::VectorXd& x0,
                                         const InteriorPointOptions& opts = {});

}  // namespace gridqcqp
