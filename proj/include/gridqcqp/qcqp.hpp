#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gridqcqp/network.hpp"

namespace gridqcqp {

enum class Representation { complex_hermitian, real_symmetric };

std::string to_string(Representation r);
Representation parse_representation(std::string_view s);  // "complex" | "real"

/// One stored entry of a Hermitian (or real symmetric) matrix. Only the upper
/// triangle is stored (row <= col); the lower triangle is implied.
struct FormEntry {
  Eigen::Index row = 0, col = 0;
  Complex value;

  bool operator==(const FormEntry&) const = default;
};

/// Quadratic form x' H x given by its upper-triangle entries, sorted by
/// (row, col) with no duplicates.
struct QuadForm {
  std::vector<FormEntry> entries;

  /// x' H x for complex x (Hermitian H) or real x (symmetric H).
  double value(const Eigen::VectorXcd& x) const;
  double value(const Eigen::VectorXd& x) const;
  bool operator==(const QuadForm&) const = default;
};

/// min x'Cx + c  s.t.  x'A_k x = a_k,  x'B_k x <= b_k.
struct QcqpProblem {
  Representation representation = Representation::complex_hermitian;
  Eigen::Index n_var = 0;
  QuadForm objective;
  double constant = 0.0;
  std::vector<QuadForm> eq;
  std::vector<double> eq_rhs;
  std::vector<QuadForm> ineq;
  std::vector<double> ineq_rhs;
  /// External bus id of each complex voltage variable; in the real
  /// representation variable i is Re V and variable n + i is Im V of bus i.
  std::vector<long long> bus_ids;

  bool operator==(const QcqpProblem&) const = default;
};

/// Quadratic model of the AC-OPF with current limits and unit costs: the
/// objective is total generation in MW, buses without generators carry P and
/// Q balance equalities, generator buses carry two-sided P and Q injection
/// bounds, every bus has two voltage bounds and every branch with a rating
/// has squared current bounds on both ends.
QcqpProblem build_qcqp(const Network& net, Representation repr);

/// Real symmetric form [[Re H, -Im H], [Im H, Re H]] of a complex problem.
QcqpProblem embed_real(const QcqpProblem& complex_problem);

struct QcqpEvaluation {
  double objective = 0.0;       // x'Cx + c
  Eigen::VectorXd eq_residual;  // x'A_k x - a_k
  Eigen::VectorXd ineq_slack;   // b_k - x'B_k x
};

/// Throws DimensionError when x does not fit the problem.
QcqpEvaluation evaluate(const QcqpProblem& p, const Eigen::VectorXcd& x);
QcqpEvaluation evaluate(const QcqpProblem& p, const Eigen::VectorXd& x);

/// Candidate vector for bus voltages `v` in the problem's representation.
Eigen::VectorXd real_candidate(const Eigen::VectorXcd& v);

struct QcqpSize {
  Eigen::Index n_var = 0;  // real variables
  std::size_t n_eq = 0, n_ineq = 0;
  std::size_t coupled_positions = 0;  // distinct off-diagonal real positions
  double sparsity_percent = 0.0;
};

/// Sizes in the real representation. Sparsity is the share of distinct
/// off-diagonal positions i < j that appear in any matrix, over all
/// n_var (n_var - 1) / 2 such positions.
QcqpSize qcqp_size(const QcqpProblem& p);

/// Sparse triplet text format, see docs/qcqp_format.md.
std::string export_qcqp(const QcqpProblem& p);
/// Throws ParseError with the offending line.
QcqpProblem parse_qcqp(std::string_view text);

/// Shor relaxation in SDPA sparse format (.dat-s). Requires the real
/// representation; throws std::invalid_argument otherwise.
///
///   max  -C • X
///   s.t.  A_k • X = a_k,  B_k • X + s_k = b_k,  X ⪰ 0,  s >= 0
///
/// Block 1 holds X, block 2 the diagonal slacks (omitted without
/// inequalities). The relaxed QCQP value is c minus the SDPA objective; c is
/// recorded in a leading comment line.
std::string export_shor_sdpa(const QcqpProblem& p);

}  // namespace gridqcqp
