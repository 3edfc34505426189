#include "gridqcqp/qcqp.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

using Eigen::Index;

std::string to_string(Representation r) {
  return r == Representation::complex_hermitian ? "complex" : "real";
}

Representation parse_representation(std::string_view s) {
  if (s == "complex") return Representation::complex_hermitian;
  if (s == "real") return Representation::real_symmetric;
  throw std::invalid_argument("unknown representation '" + std::string(s) +
                              "' (expected complex or real)");
}

double QuadForm::value(const Eigen::VectorXcd& x) const {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.row == e.col)
      s += e.value.real() * std::norm(x[e.row]);
    else
      s += 2.0 * (std::conj(x[e.row]) * e.value * x[e.col]).real();
  }
  return s;
}

double QuadForm::value(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& e : entries) {
    const double t = e.value.real() * x[e.row] * x[e.col];
    s += e.row == e.col ? t : 2.0 * t;
  }
  return s;
}

namespace {

/// Accumulates Hermitian entries given anywhere in the matrix; a lower entry
/// (i > j) is stored as the conjugate at (j, i).
class FormBuilder {
 public:
  void add(Index i, Index j, Complex v) {
    if (i > j) {
      std::swap(i, j);
      v = std::conj(v);
    }
    acc_[{i, j}] += v;
  }
  QuadForm take(double scale = 1.0) {
    QuadForm f;
    f.entries.reserve(acc_.size());
    for (const auto& [key, v] : acc_) {
      const Complex value = key.first == key.second ? Complex(v.real(), 0.0) : v;
      f.entries.push_back({key.first, key.second, scale * value});
    }
    acc_.clear();
    return f;
  }

 private:
  std::map<std::pair<Index, Index>, Complex> acc_;
};

QuadForm negated(QuadForm f) {
  for (auto& e : f.entries) e.value = -e.value;
  return f;
}

/// Re(V_i conj(I_i)) and Im(...) as Hermitian forms.
void injection_forms(const SparseComplex& ybus, Index i, QuadForm& p,
                     QuadForm& q) {
  FormBuilder bp, bq;
  const Complex j(0.0, 1.0);
  for (SparseComplex::InnerIterator it(ybus, i); it; ++it) {
    const Index k = it.col();
    const Complex y = it.value();
    if (k == i) {
      bp.add(i, i, y.real());
      bq.add(i, i, -y.imag());
    } else {
      // x'Mx with M(k, i) = conj(Y_ik) equals S_i; split into its Hermitian
      // and skew-Hermitian parts.
      bp.add(i, k, 0.5 * y);
      bq.add(i, k, 0.5 * j * y);
    }
  }
  p = bp.take();
  q = bq.take();
}

QuadForm current_form(const SparseComplex& y_end, Index k) {
  FormBuilder b;
  std::vector<std::pair<Index, Complex>> row;
  for (SparseComplex::InnerIterator it(y_end, k); it; ++it)
    row.emplace_back(it.col(), it.value());
  for (const auto& [a, ra] : row)
    for (const auto& [c, rc] : row)
      if (a <= c) b.add(a, c, std::conj(ra) * rc);
  return b.take();
}

QuadForm voltage_form(Index i) { return QuadForm{{{i, i, Complex(1.0, 0.0)}}}; }

QuadForm embed_form(const QuadForm& f, Index n) {
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& e : f.entries) {
    const double a = e.value.real(), b = e.value.imag();
    acc[{e.row, e.col}] += a;
    acc[{n + e.row, n + e.col}] += a;
    if (e.row != e.col) {
      // Kept even when zero so the pattern matches the complex structure.
      acc[{e.row, n + e.col}] += -b;
      acc[{e.col, n + e.row}] += b;
    }
  }
  QuadForm out;
  out.entries.reserve(acc.size());
  for (const auto& [key, v] : acc)
    out.entries.push_back({key.first, key.second, Complex(v, 0.0)});
  return out;
}

void require_dimension(const QcqpProblem& p, Index size, Representation want) {
  if (p.representation != want)
    throw DimensionError("candidate type does not match the " +
                         to_string(p.representation) + " representation");
  if (size != p.n_var)
    throw DimensionError("candidate has " + std::to_string(size) +
                         " entries, problem has " + std::to_string(p.n_var));
}

template <typename Vec>
QcqpEvaluation evaluate_impl(const QcqpProblem& p, const Vec& x) {
  QcqpEvaluation r;
  r.objective = p.objective.value(x) + p.constant;
  r.eq_residual.resize(static_cast<Index>(p.eq.size()));
  for (std::size_t k = 0; k < p.eq.size(); ++k)
    r.eq_residual[static_cast<Index>(k)] = p.eq[k].value(x) - p.eq_rhs[k];
  r.ineq_slack.resize(static_cast<Index>(p.ineq.size()));
  for (std::size_t k = 0; k < p.ineq.size(); ++k)
    r.ineq_slack[static_cast<Index>(k)] = p.ineq_rhs[k] - p.ineq[k].value(x);
  return r;
}

}  // namespace

QcqpProblem build_qcqp(const Network& net, Representation repr) {
  const auto adm = build_admittance(net);
  const auto n = static_cast<Index>(net.buses.size());
  const double base = net.base_mva;
  QcqpProblem prob;
  prob.representation = Representation::complex_hermitian;
  prob.n_var = n;
  for (const auto& b : net.buses) prob.bus_ids.push_back(b.id);

  const auto by_bus = net.gens_by_bus();
  FormBuilder objective;
  std::vector<QuadForm> gen_rows;
  std::vector<double> gen_rhs;
  for (const auto& bus : net.buses) {
    const auto i = static_cast<Index>(bus.index);
    QuadForm p, q;
    injection_forms(adm.ybus, i, p, q);
    const auto& gens = by_bus[bus.index];
    if (gens.empty()) {
      prob.eq.push_back(p);
      prob.eq_rhs.push_back(0.0 - bus.pd);
      prob.eq.push_back(q);
      prob.eq_rhs.push_back(0.0 - bus.qd);
      continue;
    }
    for (const auto& e : p.entries) objective.add(e.row, e.col, e.value);
    prob.constant += base * bus.pd;
    double pmin = 0.0, pmax = 0.0, qmin = 0.0, qmax = 0.0;
    for (const auto g : gens) {
      pmin += net.gens[g].pmin;
      pmax += net.gens[g].pmax;
      qmin += net.gens[g].qmin;
      qmax += net.gens[g].qmax;
    }
    gen_rows.push_back(p);
    gen_rhs.push_back(pmax - bus.pd);
    gen_rows.push_back(negated(p));
    gen_rhs.push_back(bus.pd - pmin);
    gen_rows.push_back(q);
    gen_rhs.push_back(qmax - bus.qd);
    gen_rows.push_back(negated(q));
    gen_rhs.push_back(bus.qd - qmin);
  }
  prob.objective = objective.take(base);

  prob.ineq = std::move(gen_rows);
  prob.ineq_rhs = std::move(gen_rhs);
  for (const auto& bus : net.buses) {
    const auto i = static_cast<Index>(bus.index);
    prob.ineq.push_back(voltage_form(i));
    prob.ineq_rhs.push_back(bus.vmax * bus.vmax);
    prob.ineq.push_back(negated(voltage_form(i)));
    prob.ineq_rhs.push_back(-bus.vmin * bus.vmin);
  }
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const double rate = net.branches[k].rate;
    if (!(rate > 0.0)) continue;
    prob.ineq.push_back(current_form(adm.yf, static_cast<Index>(k)));
    prob.ineq_rhs.push_back(rate * rate);
    prob.ineq.push_back(current_form(adm.yt, static_cast<Index>(k)));
    prob.ineq_rhs.push_back(rate * rate);
  }
  return repr == Representation::real_symmetric ? embed_real(prob) : prob;
}

QcqpProblem embed_real(const QcqpProblem& c) {
  if (c.representation == Representation::real_symmetric) return c;
  QcqpProblem r;
  r.representation = Representation::real_symmetric;
  r.n_var = 2 * c.n_var;
  r.objective = embed_form(c.objective, c.n_var);
  r.constant = c.constant;
  for (const auto& f : c.eq) r.eq.push_back(embed_form(f, c.n_var));
  r.eq_rhs = c.eq_rhs;
  for (const auto& f : c.ineq) r.ineq.push_back(embed_form(f, c.n_var));
  r.ineq_rhs = c.ineq_rhs;
  r.bus_ids = c.bus_ids;
  return r;
}

QcqpEvaluation evaluate(const QcqpProblem& p, const Eigen::VectorXcd& x) {
  require_dimension(p, x.size(), Representation::complex_hermitian);
  return evaluate_impl(p, x);
}

QcqpEvaluation evaluate(const QcqpProblem& p, const Eigen::VectorXd& x) {
  require_dimension(p, x.size(), Representation::real_symmetric);
  return evaluate_impl(p, x);
}

Eigen::VectorXd real_candidate(const Eigen::VectorXcd& v) {
  Eigen::VectorXd x(2 * v.size());
  x << v.real(), v.imag();
  return x;
}

QcqpSize qcqp_size(const QcqpProblem& p) {
  const bool cplx = p.representation == Representation::complex_hermitian;
  QcqpSize s;
  s.n_var = cplx ? 2 * p.n_var : p.n_var;
  s.n_eq = p.eq.size();
  s.n_ineq = p.ineq.size();

  std::unordered_set<unsigned long long> positions;
  const auto key = [&](Index i, Index j) {
    return static_cast<unsigned long long>(i) *
               static_cast<unsigned long long>(s.n_var) +
           static_cast<unsigned long long>(j);
  };
  const auto scan = [&](const QuadForm& f) {
    for (const auto& e : f.entries) {
      if (e.row == e.col) continue;
      if (!cplx) {
        positions.insert(key(e.row, e.col));
        continue;
      }
      const Index n = p.n_var;
      positions.insert(key(e.row, e.col));
      positions.insert(key(n + e.row, n + e.col));
      positions.insert(key(e.row, n + e.col));
      positions.insert(key(e.col, n + e.row));
    }
  };
  scan(p.objective);
  for (const auto& f : p.eq) scan(f);
  for (const auto& f : p.ineq) scan(f);
  s.coupled_positions = positions.size();
  const double total =
      0.5 * static_cast<double>(s.n_var) * static_cast<double>(s.n_var - 1);
  s.sparsity_percent =
      total > 0.0 ? 100.0 * static_cast<double>(s.coupled_positions) / total : 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Triplet text format

namespace {

void write_form(std::ostringstream& out, const QuadForm& f) {
  for (const auto& e : f.entries)
    out << (e.row + 1) << ' ' << (e.col + 1) << ' '
        << format_number(e.value.real()) << ' ' << format_number(e.value.imag())
        << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Next non-blank, non-comment line split into tokens; empty at the end.
  std::vector<std::string_view> next() {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      std::string_view line = text_.substr(
          pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
      pos_ = end == std::string_view::npos ? text_.size() : end + 1;
      ++line_;
      if (const auto c = line.find('%'); c != std::string_view::npos)
        line = line.substr(0, c);
      std::vector<std::string_view> tokens;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return tokens;
    }
    return {};
  }

  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_);
  }

  double number(std::string_view tok) const {
    const auto v = parse_number(tok);
    if (!v) fail("bad number '" + std::string(tok) + "'");
    return *v;
  }

  long long integer(std::string_view tok) const {
    long long v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      fail("bad integer '" + std::string(tok) + "'");
    return v;
  }

  std::vector<std::string_view> expect(std::string_view keyword,
                                       std::size_t n_tokens) {
    auto t = next();
    if (t.empty()) fail("unexpected end of input, expected '" + std::string(keyword) + "'");
    if (t.front() != keyword || t.size() != n_tokens)
      fail("expected '" + std::string(keyword) + "' with " +
           std::to_string(n_tokens - 1) + " fields");
    return t;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

QuadForm read_form(LineReader& in, long long nnz, Index n_var, bool cplx) {
  QuadForm f;
  f.entries.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    const auto t = in.next();
    if (t.size() != 4) in.fail("expected 'row col re im'");
    const Index r = in.integer(t[0]) - 1, c = in.integer(t[1]) - 1;
    if (r < 0 || c < r || c >= n_var) in.fail("entry outside the upper triangle");
    const double im = in.number(t[3]);
    if (!cplx && im != 0.0) in.fail("imaginary part in a real problem");
    if (r == c && im != 0.0) in.fail("imaginary diagonal entry");
    if (!f.entries.empty()) {
      const auto& prev = f.entries.back();
      if (std::pair(prev.row, prev.col) >= std::pair(r, c))
        in.fail("entries not sorted by (row, col)");
    }
    f.entries.push_back({r, c, Complex(in.number(t[2]), im)});
  }
  return f;
}

}  // namespace

std::string export_qcqp(const QcqpProblem& p) {
  std::ostringstream out;
  out << "% x'Cx + c -> min, x'A_k x = a_k, x'B_k x <= b_k\n"
      << "% entries: row col re im, 1-based, upper triangle\n"
      << "qcqp 1\n"
      << "representation " << to_string(p.representation) << '\n'
      << "n_var " << p.n_var << '\n'
      << "n_eq " << p.eq.size() << '\n'
      << "n_ineq " << p.ineq.size() << '\n'
      << "buses " << p.bus_ids.size();
  for (const auto id : p.bus_ids) out << ' ' << id;
  out << '\n'
      << "objective " << p.objective.entries.size() << ' '
      << format_number(p.constant) << '\n';
  write_form(out, p.objective);
  for (std::size_t k = 0; k < p.eq.size(); ++k) {
    out << "eq " << (k + 1) << ' ' << p.eq[k].entries.size() << ' '
        << format_number(p.eq_rhs[k]) << '\n';
    write_form(out, p.eq[k]);
  }
  for (std::size_t k = 0; k < p.ineq.size(); ++k) {
    out << "ineq " << (k + 1) << ' ' << p.ineq[k].entries.size() << ' '
        << format_number(p.ineq_rhs[k]) << '\n';
    write_form(out, p.ineq[k]);
  }
  out << "end\n";
  return out.str();
}

QcqpProblem parse_qcqp(std::string_view text) {
  LineReader in(text);
  QcqpProblem p;
  if (in.integer(in.expect("qcqp", 2)[1]) != 1) in.fail("unsupported qcqp format version");
  p.representation = [&] {
    const auto t = in.expect("representation", 2);
    try {
      return parse_representation(t[1]);
    } catch (const std::invalid_argument& e) {
      in.fail(e.what());
    }
  }();
  const bool cplx = p.representation == Representation::complex_hermitian;
  p.n_var = in.integer(in.expect("n_var", 2)[1]);
  const long long n_eq = in.integer(in.expect("n_eq", 2)[1]);
  const long long n_ineq = in.integer(in.expect("n_ineq", 2)[1]);
  if (p.n_var < 0 || n_eq < 0 || n_ineq < 0) in.fail("negative size");

  auto t = in.next();
  if (t.empty() || t.front() != "buses") in.fail("expected 'buses'");
  const long long nb = in.integer(t[1]);
  if (static_cast<long long>(t.size()) != nb + 2) in.fail("bus id count mismatch");
  for (std::size_t k = 2; k < t.size(); ++k) p.bus_ids.push_back(in.integer(t[k]));

  t = in.expect("objective", 3);
  const long long nnz = in.integer(t[1]);
  p.constant = in.number(t[2]);
  p.objective = read_form(in, nnz, p.n_var, cplx);

  const auto section = [&](std::string_view kw, long long count,
                           std::vector<QuadForm>& forms, std::vector<double>& rhs) {
    for (long long k = 0; k < count; ++k) {
      const auto h = in.expect(kw, 4);
      if (in.integer(h[1]) != k + 1) in.fail("constraint numbers out of order");
      const long long m = in.integer(h[2]);
      rhs.push_back(in.number(h[3]));
      forms.push_back(read_form(in, m, p.n_var, cplx));
    }
  };
  section("eq", n_eq, p.eq, p.eq_rhs);
  section("ineq", n_ineq, p.ineq, p.ineq_rhs);
  in.expect("end", 1);
  if (!in.next().empty()) in.fail("content after 'end'");
  return p;
}

// ---------------------------------------------------------------------------
// SDPA

std::string export_shor_sdpa(const QcqpProblem& p) {
  if (p.representation != Representation::real_symmetric)
    throw std::invalid_argument("SDPA export needs the real representation");
  const std::size_t m = p.eq.size() + p.ineq.size();
  const bool slack_block = !p.ineq.empty();
  std::ostringstream out;
  out << "* Shor relaxation: max -C.X  s.t. A_k.X = a_k, B_k.X + s_k = b_k\n"
      << "* objective constant " << format_number(p.constant) << '\n'
      << "* relaxed QCQP value = constant - optimal objective\n"
      << m << " = mDIM\n"
      << (slack_block ? 2 : 1) << " = nBLOCK\n"
      << p.n_var;
  if (slack_block) out << ' ' << -static_cast<long long>(p.ineq.size());
  out << " = bLOCKsTRUCT\n";
  for (std::size_t k = 0; k < m; ++k) {
    if (k) out << ' ';
    out << format_number(k < p.eq.size() ? p.eq_rhs[k]
                                         : p.ineq_rhs[k - p.eq.size()]);
  }
  out << '\n';
  const auto write = [&](std::size_t mat, const QuadForm& f, double sign) {
    for (const auto& e : f.entries) {
      const double v = sign * e.value.real();
      if (v == 0.0) continue;
      out << mat << " 1 " << (e.row + 1) << ' ' << (e.col + 1) << ' '
          << format_number(v) << '\n';
    }
  };
  write(0, p.objective, -1.0);
  for (std::size_t k = 0; k < p.eq.size(); ++k) write(k + 1, p.eq[k], 1.0);
  for (std::size_t k = 0; k < p.ineq.size(); ++k) {
    const std::size_t mat = p.eq.size() + k + 1;
    write(mat, p.ineq[k], 1.0);
    out << mat << " 2 " << (k + 1) << ' ' << (k + 1) << " 1\n";
  }
  return out.str();
}

}  // namespace gridqcqp
