#include "gridqcqp/interior_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

namespace gridqcqp {

std::string to_string(InteriorPointStatus s) {
  switch (s) {
    case InteriorPointStatus::converged: return "converged";
    case InteriorPointStatus::start_optimal: return "start point optimal";
    case InteriorPointStatus::step_too_small: return "step below xtol";
    case InteriorPointStatus::iteration_limit: return "iteration limit";
    case InteriorPointStatus::numerical_failure: return "numerical failure";
  }
  return "?";
}

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Eigen::Index;
using Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr double infinite_bound = 1e10;

double inf_norm(const VectorXd& v) {
  return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

double max_or_zero(const VectorXd& v) {
  return v.size() > 0 ? v.maxCoeff() : 0.0;
}

void append(Triplets& t, const Sparse& m, Index row_offset = 0,
            Index col_offset = 0, bool transpose = false) {
  for (Index c = 0; c < m.outerSize(); ++c)
    for (Sparse::InnerIterator it(m, c); it; ++it) {
      const Index r = transpose ? it.col() : it.row();
      const Index cc = transpose ? it.row() : it.col();
      t.emplace_back(r + row_offset, cc + col_offset, it.value());
    }
}

/// The program with its variable bounds turned into constraint rows.
class Augmented {
 public:
  Augmented(const NonlinearProgram& nlp, double cost_scale)
      : nlp_(nlp), cost_scale_(cost_scale) {
    const VectorXd lo = nlp.lower_bounds(), hi = nlp.upper_bounds();
    for (Index i = 0; i < nlp.size(); ++i) {
      const bool has_lo = std::isfinite(lo[i]) && lo[i] > -infinite_bound;
      const bool has_hi = std::isfinite(hi[i]) && hi[i] < infinite_bound;
      if (has_lo && has_hi && lo[i] == hi[i]) {
        fixed_.push_back({i, lo[i]});
        continue;
      }
      if (has_hi) upper_.push_back({i, hi[i]});
      if (has_lo) lower_.push_back({i, lo[i]});
    }
  }

  struct Eval {
    double f = 0.0;  // scaled
    VectorXd df, g, h;
    Sparse jg, jh;
  };

  void evaluate(const VectorXd& x, Eval& e) const {
    e.f = cost_scale_ * nlp_.objective(x, e.df);
    e.df *= cost_scale_;

    VectorXd g;
    Sparse jg;
    nlp_.equalities(x, g, jg);
    neq_ = g.size();
    e.g.resize(neq_ + static_cast<Index>(fixed_.size()));
    e.g.head(neq_) = g;
    Triplets t;
    append(t, jg);
    for (std::size_t k = 0; k < fixed_.size(); ++k) {
      const auto row = neq_ + static_cast<Index>(k);
      e.g[row] = x[fixed_[k].index] - fixed_[k].value;
      t.emplace_back(row, fixed_[k].index, 1.0);
    }
    e.jg.resize(e.g.size(), x.size());
    e.jg.setFromTriplets(t.begin(), t.end());

    VectorXd h;
    Sparse jh;
    nlp_.inequalities(x, h, jh);
    niq_ = h.size();
    e.h.resize(niq_ + static_cast<Index>(upper_.size() + lower_.size()));
    e.h.head(niq_) = h;
    t.clear();
    append(t, jh);
    Index row = niq_;
    for (const auto& b : upper_) {
      e.h[row] = x[b.index] - b.value;
      t.emplace_back(row++, b.index, 1.0);
    }
    for (const auto& b : lower_) {
      e.h[row] = b.value - x[b.index];
      t.emplace_back(row++, b.index, -1.0);
    }
    e.jh.resize(e.h.size(), x.size());
    e.jh.setFromTriplets(t.begin(), t.end());
  }

  Sparse hessian(const VectorXd& x, const VectorXd& lam,
                 const VectorXd& mu) const {
    return nlp_.lagrangian_hessian(x, cost_scale_, lam.head(neq_),
                                   mu.head(niq_));
  }

  Index nonlinear_equalities() const { return neq_; }
  Index nonlinear_inequalities() const { return niq_; }

 private:
  struct Bound {
    Index index;
    double value;
  };
  const NonlinearProgram& nlp_;
  double cost_scale_;
  std::vector<Bound> fixed_, upper_, lower_;
  mutable Index neq_ = 0, niq_ = 0;
};

struct Conditions {
  double feas = 0.0, grad = 0.0, comp = 0.0, cost = 0.0;
};

Conditions conditions(const VectorXd& x, const VectorXd& z,
                      const VectorXd& lam, const VectorXd& mu,
                      const VectorXd& lx, const Augmented::Eval& e, double f0) {
  Conditions c;
  c.feas = std::max(inf_norm(e.g), max_or_zero(e.h));
  c.grad = inf_norm(lx) / (1.0 + std::max(inf_norm(lam), inf_norm(mu)));
  c.comp = z.size() > 0 ? z.dot(mu) / (1.0 + inf_norm(x)) : 0.0;
  c.cost = std::abs(e.f - f0) / (1.0 + std::abs(f0));
  return c;
}

/// Least-squares multipliers on the active set; true when they certify the
/// start as a KKT point.
bool start_is_kkt(const Augmented::Eval& e, const VectorXd& x,
                  const InteriorPointOptions& opts) {
  if (std::max(inf_norm(e.g), max_or_zero(e.h)) > opts.feastol)
    return false;
  const double active_tol = std::sqrt(opts.feastol);
  std::vector<Index> active;
  for (Index k = 0; k < e.h.size(); ++k)
    if (e.h[k] > -active_tol) active.push_back(k);

  const Index neq = e.g.size();
  const auto na = static_cast<Index>(active.size());
  Triplets t;
  append(t, e.jg);
  const Sparse jh_rows = e.jh;  // column-major; gather active rows
  std::vector<Index> row_of(static_cast<std::size_t>(e.h.size()), -1);
  for (Index r = 0; r < na; ++r) row_of[static_cast<std::size_t>(active[static_cast<std::size_t>(r)])] = neq + r;
  for (Index c = 0; c < jh_rows.outerSize(); ++c)
    for (Sparse::InnerIterator it(jh_rows, c); it; ++it) {
      const Index r = row_of[static_cast<std::size_t>(it.row())];
      if (r >= 0) t.emplace_back(r, it.col(), it.value());
    }
  Sparse a(neq + na, x.size());
  a.setFromTriplets(t.begin(), t.end());
  if (a.rows() == 0) return inf_norm(e.df) < opts.opttol;

  Sparse normal = a * a.transpose();
  Sparse reg(normal.rows(), normal.cols());
  reg.setIdentity();
  normal += 1e-12 * reg;
  Eigen::SimplicialLDLT<Sparse> ldlt(normal);
  if (ldlt.info() != Eigen::Success) return false;
  const VectorXd y = ldlt.solve(-(a * e.df));
  const VectorXd residual = e.df + a.transpose() * y;
  const VectorXd mu = y.tail(na);
  if (na > 0 && mu.minCoeff() < -opts.opttol) return false;
  return inf_norm(residual) / (1.0 + inf_norm(y)) < opts.opttol;
}

}  // namespace

InteriorPointResult solve_interior_point(const NonlinearProgram& nlp,
                                         const VectorXd& x0,
                                         const InteriorPointOptions& opts) {
  const Augmented prob(nlp, opts.cost_scale);
  const Index nx = x0.size();
  InteriorPointResult res;
  res.x = x0;

  VectorXd x = x0;
  Augmented::Eval e;
  prob.evaluate(x, e);
  const Index neq = e.g.size(), niq = e.h.size();

  const auto finish = [&](InteriorPointStatus status, const VectorXd& lam,
                          const VectorXd& mu, const Conditions& c) {
    res.status = status;
    res.x = x;
    VectorXd grad;
    res.objective = nlp.objective(x, grad);
    res.lam = lam.head(prob.nonlinear_equalities()) / opts.cost_scale;
    res.mu = mu.head(prob.nonlinear_inequalities()) / opts.cost_scale;
    res.feas_cond = c.feas;
    res.grad_cond = c.grad;
    res.comp_cond = c.comp;
    return res;
  };

  if (opts.check_start && start_is_kkt(e, x, opts)) {
    Conditions c;
    c.feas = std::max(inf_norm(e.g), max_or_zero(e.h));
    return finish(InteriorPointStatus::start_optimal, VectorXd::Zero(neq),
                  VectorXd::Zero(niq), c);
  }

  double gamma = 1.0;
  VectorXd z = VectorXd::Ones(niq);
  for (Index k = 0; k < niq; ++k)
    if (e.h[k] < -1.0) z[k] = -e.h[k];
  VectorXd mu = (gamma / z.array()).max(1.0).matrix();
  VectorXd lam = VectorXd::Zero(neq);
  VectorXd lx = e.df + e.jg.transpose() * lam + e.jh.transpose() * mu;
  double f0 = e.f;
  Conditions c = conditions(x, z, lam, mu, lx, e, f0);

  VectorXd best_x;
  double best_f = std::numeric_limits<double>::infinity();
  const auto remember = [&] {
    if (c.feas < opts.feastol && e.f < best_f) {
      best_f = e.f;
      best_x = x;
    }
  };
  remember();

  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::UmfPackLU<Sparse> lu;
  bool pattern_known = false;
  InteriorPointStatus status = InteriorPointStatus::iteration_limit;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Sparse lxx = prob.hessian(x, lam, mu);
    const VectorXd zinv = z.cwiseInverse();
    const Sparse jht = e.jh.transpose();
    const Sparse m =
        lxx + jht * (mu.cwiseProduct(zinv)).asDiagonal() * e.jh;
    const VectorXd n_vec =
        lx + jht * ((mu.cwiseProduct(e.h).array() + gamma) * zinv.array())
                       .matrix();

    Triplets t;
    t.reserve(static_cast<std::size_t>(m.nonZeros() + 2 * e.jg.nonZeros()));
    append(t, m);
    append(t, e.jg, nx, 0);
    append(t, e.jg, 0, nx, true);
    Sparse kkt(nx + neq, nx + neq);
    kkt.setFromTriplets(t.begin(), t.end());
    kkt.makeCompressed();
    VectorXd rhs(nx + neq);
    rhs << -n_vec, -e.g;

    if (!pattern_known) {
      lu.analyzePattern(kkt);
      pattern_known = true;
    }
    lu.factorize(kkt);
    if (lu.info() != Eigen::Success) {
      lu.compute(kkt);
      if (lu.info() != Eigen::Success) {
        status = InteriorPointStatus::numerical_failure;
        break;
      }
    }
    const VectorXd d = lu.solve(rhs);
    if (!d.allFinite()) {
      status = InteriorPointStatus::numerical_failure;
      break;
    }
    const VectorXd dx = d.head(nx), dlam = d.tail(neq);
    const VectorXd dz = -e.h - z - e.jh * dx;
    const VectorXd dmu =
        -mu + (zinv.array() * (gamma - mu.array() * dz.array())).matrix();

    double alphap = 1.0, alphad = 1.0;
    for (Index k = 0; k < niq; ++k) {
      if (dz[k] < 0.0) alphap = std::min(alphap, -opts.step_fraction * z[k] / dz[k]);
      if (dmu[k] < 0.0) alphad = std::min(alphad, -opts.step_fraction * mu[k] / dmu[k]);
    }

    x += alphap * dx;
    z += alphap * dz;
    lam += alphad * dlam;
    mu += alphad * dmu;
    if (niq > 0) gamma = opts.barrier_reduction * z.dot(mu) / static_cast<double>(niq);

    f0 = e.f;
    prob.evaluate(x, e);
    lx = e.df + e.jg.transpose() * lam + e.jh.transpose() * mu;
    c = conditions(x, z, lam, mu, lx, e, f0);
    res.iterations = it + 1;
    remember();

    if (c.feas < opts.feastol && c.grad < opts.opttol &&
        c.comp < opts.comptol && c.cost < opts.costtol) {
      status = InteriorPointStatus::converged;
      break;
    }
    if (c.feas < opts.feastol &&
        alphap * inf_norm(dx) / (1.0 + inf_norm(x)) < opts.xtol) {
      status = InteriorPointStatus::step_too_small;
      break;
    }
    if (!x.allFinite() || alphap < 1e-8 || alphad < 1e-8 || gamma < eps ||
        gamma > 1.0 / eps) {
      status = InteriorPointStatus::numerical_failure;
      break;
    }
  }

  if (status != InteriorPointStatus::converged &&
      status != InteriorPointStatus::step_too_small && best_x.size() == nx) {
    x = best_x;
    prob.evaluate(x, e);
    lx = e.df + e.jg.transpose() * lam + e.jh.transpose() * mu;
    c = conditions(x, z, lam, mu, lx, e, e.f);
    res.degraded = true;
  }
  return finish(status, lam, mu, c);
}

}  // namespace gridqcqp
