#include "gridqcqp/ac_model.hpp"

#include <cmath>

namespace gridqcqp {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// A scalar function of the four local variables (θa, θb, ma, mb) with its
// gradient and Hessian.
struct Local4 {
  double value = 0.0;
  std::array<double, 4> grad{};
  std::array<std::array<double, 4>, 4> hess{};
};

enum : std::size_t { kThA = 0, kThB = 1, kMA = 2, kMB = 3 };

// ma * mb * Re(c * exp(j (θa - θb))).
Local4 pair_term(Complex c, double ta, double tb, double ma, double mb) {
  const double phi = ta - tb;
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double g0 = c.real() * cs - c.imag() * sn;   // Re(c e^{jφ})
  const double g1 = -c.real() * sn - c.imag() * cs;  // d/dφ
  const double mm = ma * mb;
  Local4 f;
  f.value = mm * g0;
  f.grad = {mm * g1, -mm * g1, mb * g0, ma * g0};
  auto& h = f.hess;
  h[kThA][kThA] = -mm * g0;
  h[kThB][kThB] = -mm * g0;
  h[kThA][kThB] = h[kThB][kThA] = mm * g0;
  h[kThA][kMA] = h[kMA][kThA] = mb * g1;
  h[kThA][kMB] = h[kMB][kThA] = ma * g1;
  h[kThB][kMA] = h[kMA][kThB] = -mb * g1;
  h[kThB][kMB] = h[kMB][kThB] = -ma * g1;
  h[kMA][kMB] = h[kMB][kMA] = g0;
  return f;
}

// f += alpha * m², m being local variable `slot` (kMA or kMB).
void add_square(Local4& f, double alpha, std::size_t slot, double m) {
  f.value += alpha * m * m;
  f.grad[slot] += 2.0 * alpha * m;
  f.hess[slot][slot] += 2.0 * alpha;
}

// |S|² from its real and imaginary parts.
Local4 squared_modulus(const Local4& p, const Local4& q) {
  Local4 f;
  f.value = p.value * p.value + q.value * q.value;
  for (std::size_t i = 0; i < 4; ++i) {
    f.grad[i] = 2.0 * (p.value * p.grad[i] + q.value * q.grad[i]);
    for (std::size_t j = 0; j < 4; ++j)
      f.hess[i][j] = 2.0 * (p.grad[i] * p.grad[j] + q.grad[i] * q.grad[j] +
                            p.value * p.hess[i][j] + q.value * q.hess[i][j]);
  }
  return f;
}

constexpr Complex kMinusJ{0.0, -1.0};

// Squared flow quantity at one branch end. `own` is the end being measured.
// Local variables: (θ_own, θ_other, m_own, m_other).
Local4 end_flow(FlowLimit mode, Complex y_own, Complex y_mutual, double t_own,
                double t_other, double m_own, double m_other) {
  if (mode == FlowLimit::current) {
    // |y_own V_own + y_mutual V_other|²
    Local4 f = pair_term(2.0 * y_own * std::conj(y_mutual), t_own, t_other,
                         m_own, m_other);
    add_square(f, std::norm(y_own), kMA, m_own);
    add_square(f, std::norm(y_mutual), kMB, m_other);
    return f;
  }
  // S = conj(y_own) m_own² + conj(y_mutual) m_own m_other e^{j(θo - θt)}
  const Complex cs = std::conj(y_own), cm = std::conj(y_mutual);
  Local4 p = pair_term(cm, t_own, t_other, m_own, m_other);
  add_square(p, cs.real(), kMA, m_own);
  Local4 q = pair_term(kMinusJ * cm, t_own, t_other, m_own, m_other);
  add_square(q, cs.imag(), kMA, m_own);
  return squared_modulus(p, q);
}

std::array<Eigen::Index, 4> local_index(std::size_t a, std::size_t b,
                                        Eigen::Index n) {
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  return {ia, ib, n + ia, n + ib};
}

void scatter_hessian(const Local4& f, double weight,
                     const std::array<Eigen::Index, 4>& idx, Triplets& out) {
  if (weight == 0.0) return;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (f.hess[i][j] != 0.0)
        out.emplace_back(idx[i], idx[j], weight * f.hess[i][j]);
}

}  // namespace

PolarVoltage PolarVoltage::from_complex(const Eigen::VectorXcd& v) {
  PolarVoltage p;
  p.angle.resize(v.size());
  p.magnitude.resize(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    p.angle[i] = std::arg(v[i]);
    p.magnitude[i] = std::abs(v[i]);
  }
  return p;
}

Eigen::VectorXcd PolarVoltage::to_complex() const {
  Eigen::VectorXcd v(angle.size());
  for (Eigen::Index i = 0; i < angle.size(); ++i)
    v[i] = std::polar(magnitude[i], angle[i]);
  return v;
}

void injections(const SparseComplex& ybus, const PolarVoltage& v,
                Eigen::VectorXd& p, Eigen::VectorXd& q) {
  const Eigen::VectorXcd s = bus_injections(ybus, v.to_complex());
  p = s.real();
  q = s.imag();
}

InjectionJacobian injection_jacobian(const SparseComplex& ybus,
                                     const PolarVoltage& v) {
  const Eigen::Index n = ybus.rows();
  Triplets pa, pm, qa, qm;
  const auto nnz = static_cast<std::size_t>(ybus.nonZeros());
  pa.reserve(2 * nnz);
  pm.reserve(2 * nnz);
  qa.reserve(2 * nnz);
  qm.reserve(2 * nnz);
  const auto& th = v.angle;
  const auto& m = v.magnitude;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseComplex::InnerIterator it(ybus, i); it; ++it) {
      const Eigen::Index k = it.col();
      const Complex c = std::conj(it.value());
      if (k == i) {
        pm.emplace_back(i, i, 2.0 * m[i] * c.real());
        qm.emplace_back(i, i, 2.0 * m[i] * c.imag());
        continue;
      }
      const Local4 fp = pair_term(c, th[i], th[k], m[i], m[k]);
      const Local4 fq = pair_term(kMinusJ * c, th[i], th[k], m[i], m[k]);
      pa.emplace_back(i, i, fp.grad[kThA]);
      pa.emplace_back(i, k, fp.grad[kThB]);
      pm.emplace_back(i, i, fp.grad[kMA]);
      pm.emplace_back(i, k, fp.grad[kMB]);
      qa.emplace_back(i, i, fq.grad[kThA]);
      qa.emplace_back(i, k, fq.grad[kThB]);
      qm.emplace_back(i, i, fq.grad[kMA]);
      qm.emplace_back(i, k, fq.grad[kMB]);
    }
  }
  InjectionJacobian jac;
  for (auto* mat : {&jac.dp_dangle, &jac.dp_dmag, &jac.dq_dangle, &jac.dq_dmag})
    mat->resize(n, n);
  jac.dp_dangle.setFromTriplets(pa.begin(), pa.end());
  jac.dp_dmag.setFromTriplets(pm.begin(), pm.end());
  jac.dq_dangle.setFromTriplets(qa.begin(), qa.end());
  jac.dq_dmag.setFromTriplets(qm.begin(), qm.end());
  return jac;
}

SparseReal injection_hessian(const SparseComplex& ybus, const PolarVoltage& v,
                             const Eigen::VectorXd& lam_p,
                             const Eigen::VectorXd& lam_q) {
  const Eigen::Index n = ybus.rows();
  Triplets t;
  t.reserve(16 * static_cast<std::size_t>(ybus.nonZeros()));
  const auto& th = v.angle;
  const auto& m = v.magnitude;
  for (Eigen::Index i = 0; i < n; ++i) {
    // lam_p Re(c x) + lam_q Re(-j c x) = Re((lam_p - j lam_q) c x)
    const Complex w(lam_p[i], -lam_q[i]);
    if (w == Complex(0.0, 0.0)) continue;
    for (SparseComplex::InnerIterator it(ybus, i); it; ++it) {
      const Eigen::Index k = it.col();
      const Complex c = w * std::conj(it.value());
      if (k == i) {
        t.emplace_back(n + i, n + i, 2.0 * c.real());
        continue;
      }
      const Local4 f = pair_term(c, th[i], th[k], m[i], m[k]);
      scatter_hessian(f, 1.0, local_index(static_cast<std::size_t>(i),
                                          static_cast<std::size_t>(k), n),
                      t);
    }
  }
  SparseReal h(2 * n, 2 * n);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

BranchFlowValues branch_flows(const Network& net, const AdmittanceModel& adm,
                              const BranchFlowSet& set, const PolarVoltage& v) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  const auto rows = static_cast<Eigen::Index>(2 * set.limited.size());
  BranchFlowValues out;
  out.value.resize(rows);
  Triplets t;
  t.reserve(8 * set.limited.size());
  for (std::size_t r = 0; r < set.limited.size(); ++r) {
    const auto& br = net.branches[set.limited[r]];
    const auto& blk = adm.blocks[set.limited[r]];
    const auto f = br.from, to = br.to;
    const Local4 ff = end_flow(set.mode, blk.yff, blk.yft, v.angle[f],
                               v.angle[to], v.magnitude[f], v.magnitude[to]);
    const Local4 ft = end_flow(set.mode, blk.ytt, blk.ytf, v.angle[to],
                               v.angle[f], v.magnitude[to], v.magnitude[f]);
    const auto row_f = static_cast<Eigen::Index>(2 * r);
    out.value[row_f] = ff.value;
    out.value[row_f + 1] = ft.value;
    const auto idx_f = local_index(f, to, n);
    const auto idx_t = local_index(to, f, n);
    for (std::size_t j = 0; j < 4; ++j) {
      t.emplace_back(row_f, idx_f[j], ff.grad[j]);
      t.emplace_back(row_f + 1, idx_t[j], ft.grad[j]);
    }
  }
  out.jacobian.resize(rows, 2 * n);
  out.jacobian.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseReal branch_flow_hessian(const Network& net, const AdmittanceModel& adm,
                               const BranchFlowSet& set, const PolarVoltage& v,
                               const Eigen::VectorXd& mu) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  Triplets t;
  t.reserve(32 * set.limited.size());
  for (std::size_t r = 0; r < set.limited.size(); ++r) {
    const double wf = mu[static_cast<Eigen::Index>(2 * r)];
    const double wt = mu[static_cast<Eigen::Index>(2 * r + 1)];
    if (wf == 0.0 && wt == 0.0) continue;
    const auto& br = net.branches[set.limited[r]];
    const auto& blk = adm.blocks[set.limited[r]];
    const auto f = br.from, to = br.to;
    scatter_hessian(end_flow(set.mode, blk.yff, blk.yft, v.angle[f],
                             v.angle[to], v.magnitude[f], v.magnitude[to]),
                    wf, local_index(f, to, n), t);
    scatter_hessian(end_flow(set.mode, blk.ytt, blk.ytf, v.angle[to],
                             v.angle[f], v.magnitude[to], v.magnitude[f]),
                    wt, local_index(to, f, n), t);
  }
  SparseReal h(2 * n, 2 * n);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

void branch_powers(const Network& net, const AdmittanceModel& adm,
                   const Eigen::VectorXcd& v, Eigen::VectorXcd& s_from,
                   Eigen::VectorXcd& s_to) {
  const Eigen::VectorXcd i_from = adm.yf * v;
  const Eigen::VectorXcd i_to = adm.yt * v;
  const auto nl = static_cast<Eigen::Index>(net.branches.size());
  s_from.resize(nl);
  s_to.resize(nl);
  for (Eigen::Index k = 0; k < nl; ++k) {
    const auto& br = net.branches[static_cast<std::size_t>(k)];
    s_from[k] = v[static_cast<Eigen::Index>(br.from)] * std::conj(i_from[k]);
    s_to[k] = v[static_cast<Eigen::Index>(br.to)] * std::conj(i_to[k]);
  }
}

}  // namespace gridqcqp
