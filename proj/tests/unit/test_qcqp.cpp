#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/powerflow.hpp"
#include "gridqcqp/qcqp.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gridqcqp;
namespace ts = test_support;

namespace {

using Sdpa = oracles::SdpaReader;

Eigen::VectorXcd random_voltages(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
  return v;
}

/// One bus with a generator and no branch.
CaseData single_bus() {
  CaseData c;
  c.name = "single";
  c.base_mva = 100.0;
  c.bus.rows = {ts::bus_row(1, 3, 30, 10)};
  c.gen.rows = {ts::gen_row(1, 30, 100)};
  c.gencost = ts::unit_gencost(1);
  return c;
}

}  // namespace

TEST_CASE("QCQP sizes of the vendored cases") {
  const struct {
    const char* name;
    Eigen::Index n_var;
    std::size_t n_eq, n_ineq;
    double sparsity;  // percent, as printed with two decimals
  } rows[] = {{"case89pegase", 178, 154, 380, 5.23},
              {"case1354pegase", 2708, 2188, 6612, 0.19},
              {"case2869pegase", 5738, 4718, 13264, 0.10},
              {"case9241pegase", 18482, 15592, 36852, 0.03}};
  for (const auto& r : rows) {
    CAPTURE(r.name);
    const auto net = build_network(ts::load(r.name));
    const auto s = qcqp_size(build_qcqp(net, Representation::real_symmetric));
    CHECK(s.n_var == r.n_var);
    CHECK(s.n_eq == r.n_eq);
    CHECK(s.n_ineq == r.n_ineq);
    CHECK(std::abs(s.sparsity_percent - r.sparsity) <= 0.005);

    // Independent count from the topology: each pair of buses joined by a
    // branch couples 4 real positions.
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& br : net.branches)
      pairs.insert(std::minmax(br.from, br.to));
    CHECK(s.coupled_positions == 4 * pairs.size());
    const double n = static_cast<double>(s.n_var);
    CHECK(s.sparsity_percent ==
          doctest::Approx(100.0 * 4.0 * static_cast<double>(pairs.size()) /
                          (n * (n - 1) / 2)));
  }
}

TEST_CASE("counting rules") {
  const auto net = build_network(ts::load("case1354pegase"));
  const auto mask = net.generator_bus_mask();
  const auto gen_buses = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  std::size_t limited = 0;
  for (const auto& br : net.branches) limited += br.rate > 0 ? 1 : 0;
  const auto p = build_qcqp(net, Representation::complex_hermitian);
  CHECK(p.eq.size() == 2 * (net.buses.size() - gen_buses));
  CHECK(p.ineq.size() == 4 * gen_buses + 2 * net.buses.size() + 2 * limited);
  CHECK(p.eq.size() == p.eq_rhs.size());
  CHECK(p.ineq.size() == p.ineq_rhs.size());
}

TEST_CASE("single bus problem") {
  const auto p = build_qcqp(build_network(single_bus()), Representation::real_symmetric);
  CHECK(p.n_var == 2);
  CHECK(p.eq.empty());
  CHECK(p.ineq.size() == 6);
  // Generation equals the load at any voltage: the objective is pd plus the
  // (zero) injection of a bus with no branch and no shunt.
  const auto e = evaluate(p, Eigen::VectorXd(Eigen::Vector2d(1.0, 0.0)));
  CHECK(e.objective == doctest::Approx(30.0));
}

TEST_CASE("evaluation at x = 0") {
  const auto net = build_network(ts::load("case89pegase"));
  const auto p = build_qcqp(net, Representation::real_symmetric);
  const auto e = evaluate(p, Eigen::VectorXd(Eigen::VectorXd::Zero(p.n_var)));
  CHECK(e.objective == p.constant);
  for (std::size_t k = 0; k < p.eq.size(); ++k)
    CHECK(e.eq_residual[static_cast<Eigen::Index>(k)] == -p.eq_rhs[k]);
  for (std::size_t k = 0; k < p.ineq.size(); ++k)
    CHECK(e.ineq_slack[static_cast<Eigen::Index>(k)] == p.ineq_rhs[k]);
  CHECK_THROWS_AS(evaluate(p, Eigen::VectorXd(Eigen::VectorXd::Zero(p.n_var + 1))),
                  DimensionError);
}

TEST_CASE("power flow point satisfies the QCQP equalities") {
  const auto net = build_network(ts::load("case89pegase"));
  const auto sol = solve_powerflow(net);
  REQUIRE(sol.converged);
  for (const auto repr : {Representation::complex_hermitian, Representation::real_symmetric}) {
    const auto p = build_qcqp(net, repr);
    const auto e = repr == Representation::real_symmetric
                       ? evaluate(p, real_candidate(sol.v))
                       : evaluate(p, sol.v);
    CHECK(e.eq_residual.cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(std::abs(e.objective - sol.objective_mw) <= 1e-5);
  }
}

TEST_CASE("complex and real forms agree") {
  const auto net = build_network(ts::load("case89pegase"));
  const auto cp = build_qcqp(net, Representation::complex_hermitian);
  const auto rp = build_qcqp(net, Representation::real_symmetric);
  CHECK(rp == embed_real(cp));
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_voltages(cp.n_var, rng);
    const auto ec = evaluate(cp, v);
    const auto er = evaluate(rp, real_candidate(v));
    const double scale = std::max(1.0, std::abs(ec.objective));
    CHECK(std::abs(ec.objective - er.objective) <= 1e-9 * scale);
    CHECK((ec.eq_residual - er.eq_residual).cwiseAbs().maxCoeff() <=
          1e-9 * std::max(1.0, ec.eq_residual.cwiseAbs().maxCoeff()));
    CHECK((ec.ineq_slack - er.ineq_slack).cwiseAbs().maxCoeff() <=
          1e-9 * std::max(1.0, ec.ineq_slack.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("Hermitian forms give real values") {
  const auto net = build_network(ts::random_case(4, 12));
  const auto p = build_qcqp(net, Representation::complex_hermitian);
  for (const auto& f : p.eq)
    for (const auto& e : f.entries)
      if (e.row == e.col) CHECK(e.value.imag() == 0.0);
  for (const auto& f : p.ineq)
    for (const auto& e : f.entries) CHECK(e.row <= e.col);
}

TEST_CASE("sparsity does not depend on row order") {
  auto c = ts::load("case89pegase");
  const auto before = qcqp_size(build_qcqp(build_network(c), Representation::real_symmetric));
  std::mt19937 rng(3);
  std::shuffle(c.branch.rows.begin(), c.branch.rows.end(), rng);
  std::shuffle(c.bus.rows.begin(), c.bus.rows.end(), rng);
  const auto after = qcqp_size(build_qcqp(build_network(c), Representation::real_symmetric));
  CHECK(after.coupled_positions == before.coupled_positions);
  CHECK(after.sparsity_percent == before.sparsity_percent);
  CHECK(after.n_eq == before.n_eq);
  CHECK(after.n_ineq == before.n_ineq);
}

TEST_CASE("text export") {
  const auto net = build_network(ts::load("case89pegase"));
  for (const auto repr : {Representation::complex_hermitian, Representation::real_symmetric}) {
    const auto p = build_qcqp(net, repr);
    const auto text = export_qcqp(p);
    CHECK(parse_qcqp(text) == p);

    std::istringstream in(text);
    std::string line;
    std::size_t eq_headers = 0, ineq_headers = 0, entry_lines = 0;
    while (std::getline(in, line)) {
      if (line.rfind("eq ", 0) == 0) ++eq_headers;
      else if (line.rfind("ineq ", 0) == 0) ++ineq_headers;
      else if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0])))
        ++entry_lines;
    }
    std::size_t nnz = p.objective.entries.size();
    for (const auto& f : p.eq) nnz += f.entries.size();
    for (const auto& f : p.ineq) nnz += f.entries.size();
    CHECK(eq_headers == p.eq.size());
    CHECK(ineq_headers == p.ineq.size());
    CHECK(entry_lines == nnz);
  }
}

TEST_CASE("export without inequalities") {
  QcqpProblem p;
  p.representation = Representation::real_symmetric;
  p.n_var = 1;
  p.objective.entries = {{0, 0, Complex(1.0, 0.0)}};
  p.eq.push_back(QuadForm{{{0, 0, Complex(1.0, 0.0)}}});
  p.eq_rhs = {1.0};
  p.bus_ids = {1};
  CHECK(parse_qcqp(export_qcqp(p)) == p);
}

TEST_CASE("parse errors") {
  const auto p = build_qcqp(build_network(ts::two_bus()), Representation::real_symmetric);
  const auto text = export_qcqp(p);
  SUBCASE("truncated") {
    CHECK_THROWS_AS(parse_qcqp(text.substr(0, text.size() / 2)), ParseError);
  }
  SUBCASE("missing end") {
    CHECK_THROWS_AS(parse_qcqp(text.substr(0, text.rfind("end"))), ParseError);
  }
  SUBCASE("entry below the diagonal") {
    std::string bad = text;
    const auto at = bad.find("\n1 1 ");
    REQUIRE(at != std::string::npos);
    bad.replace(at, 5, "\n2 1 ");
    try {
      parse_qcqp(bad);
      FAIL("no throw");
    } catch (const ParseError& e) {
      const auto expected =
          static_cast<std::size_t>(std::count(bad.begin(), bad.begin() + static_cast<long>(at), '\n')) + 2;
      CHECK(e.line() == expected);
    }
  }
  SUBCASE("wrong magic") {
    std::string bad = text;
    bad.replace(bad.find("qcqp 1"), 6, "qcqp 9");
    CHECK_THROWS_AS(parse_qcqp(bad), ParseError);
  }
}

TEST_CASE("Shor relaxation in SDPA format") {
  SUBCASE("min x^2 s.t. x^2 = 1") {
    QcqpProblem p;
    p.representation = Representation::real_symmetric;
    p.n_var = 1;
    p.objective.entries = {{0, 0, Complex(1.0, 0.0)}};
    p.eq.push_back(QuadForm{{{0, 0, Complex(1.0, 0.0)}}});
    p.eq_rhs = {1.0};
    const Sdpa s(export_shor_sdpa(p));
    CHECK(s.m == 1);
    CHECK(s.blocks == std::vector<int>{1});
    CHECK(s.c == std::vector<double>{1.0});
    // The only feasible X is [1]; its SDPA objective -C.X = -1, so the
    // relaxed value is 0 - (-1) = 1.
    const std::vector<Eigen::MatrixXd> y{Eigen::MatrixXd::Constant(1, 1, 1.0)};
    CHECK(s.inner(1, y) == 1.0);
    CHECK(s.inner(0, y) == -1.0);  // F0 = -C
    CHECK(p.constant - s.inner(0, y) == 1.0);
  }
  SUBCASE("complex problems are refused") {
    const auto p = build_qcqp(build_network(ts::two_bus()), Representation::complex_hermitian);
    CHECK_THROWS_AS(export_shor_sdpa(p), std::invalid_argument);
  }
  SUBCASE("lifted power flow point is feasible") {
    const auto net = build_network(ts::load("case89pegase"));
    const auto sol = solve_powerflow(net);
    REQUIRE(sol.converged);
    const auto p = build_qcqp(net, Representation::real_symmetric);
    const Sdpa s(export_shor_sdpa(p));
    REQUIRE(s.m == static_cast<int>(p.eq.size() + p.ineq.size()));
    REQUIRE(s.blocks == std::vector<int>{static_cast<int>(p.n_var),
                                         -static_cast<int>(p.ineq.size())});
    const Eigen::VectorXd x = real_candidate(sol.v);
    const Eigen::MatrixXd xx = x * x.transpose();
    const auto slack_block = [&](const Eigen::VectorXd& slack) {
      return Eigen::MatrixXd(slack.asDiagonal());
    };
    Eigen::VectorXd slack(static_cast<Eigen::Index>(p.ineq.size()));
    for (std::size_t k = 0; k < p.ineq.size(); ++k)
      slack[static_cast<Eigen::Index>(k)] =
          s.c[p.eq.size() + k] - s.inner(static_cast<int>(p.eq.size() + k + 1),
                                         {xx, Eigen::MatrixXd::Zero(slack.size(), slack.size())});
    CHECK(slack.minCoeff() > 0.0);
    const std::vector<Eigen::MatrixXd> y{xx, slack_block(slack)};
    double worst = 0.0;
    for (int k = 1; k <= s.m; ++k)
      worst = std::max(worst, std::abs(s.inner(k, y) - s.c[static_cast<std::size_t>(k - 1)]));
    CHECK(worst <= 1e-7);
    CHECK(std::any_of(s.comments.begin(), s.comments.end(), [](const std::string& c) {
      return c.find("constant") != std::string::npos;
    }));
    CHECK(p.constant - s.inner(0, y) == doctest::Approx(sol.objective_mw).epsilon(1e-9));
  }
}

TEST_CASE("representation names") {
  CHECK(parse_representation("complex") == Representation::complex_hermitian);
  CHECK(parse_representation("real") == Representation::real_symmetric);
  CHECK(to_string(Representation::real_symmetric) == "real");
  CHECK_THROWS(parse_representation("quaternion"));
}
