#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/network.hpp"
#include "gridqcqp/stats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gridqcqp;
namespace ts = test_support;

namespace {

double ybus_gap(const Network& net) {
  return oracles::max_rel_diff(Eigen::MatrixXcd(build_admittance(net).ybus),
                               oracles::dense_ybus(net));
}

}  // namespace

TEST_CASE("build_network on case89pegase") {
  const auto c = ts::load("case89pegase");
  const auto net = build_network(c);
  CHECK(net.buses.size() == 89);
  CHECK(net.branches.size() == 210);
  CHECK(net.buses[net.slack].type == BusType::ref);
  CHECK(net.warnings.empty());
}

TEST_CASE("per-unit conversion and tap convention") {
  const auto net = build_network(ts::two_bus(0.01, 0.1, 50.0, 20.0));
  REQUIRE(net.branches.size() == 1);
  const auto& br = net.branches[0];
  CHECK(br.tap == 1.0);
  CHECK(std::abs(br.y - 1.0 / Complex(0.01, 0.1)) < 1e-15);
  CHECK(net.buses[1].pd == doctest::Approx(0.5));
  CHECK(net.buses[1].qd == doctest::Approx(0.2));
}

TEST_CASE("2-bus admittance by hand") {
  // y = 1 - j10 is the series admittance of z = (1 + j10) / 101.
  const Complex y(1.0, -10.0);
  const Complex z = 1.0 / y;
  auto c = ts::two_bus(z.real(), z.imag());
  SUBCASE("nominal tap") {
    const auto adm = build_admittance(build_network(c));
    const Eigen::MatrixXcd ybus(adm.ybus);
    CHECK(std::abs(ybus(0, 0) - y) < 1e-12);
    CHECK(std::abs(ybus(0, 1) + y) < 1e-12);
    CHECK(std::abs(ybus(1, 0) + y) < 1e-12);
    CHECK(std::abs(ybus(1, 1) - y) < 1e-12);
  }
  SUBCASE("tap 1.05") {
    c.branch.rows[0][branch_col::tap] = 1.05;
    const auto adm = build_admittance(build_network(c));
    const Eigen::MatrixXcd ybus(adm.ybus);
    CHECK(std::abs(ybus(0, 0) - y / (1.05 * 1.05)) < 1e-12);
    CHECK(std::abs(ybus(0, 1) + y / 1.05) < 1e-12);
    CHECK(std::abs(ybus(1, 0) + y / 1.05) < 1e-12);
    CHECK(std::abs(ybus(1, 1) - y) < 1e-12);
  }
}

TEST_CASE("Ybus equals the dense oracle") {
  for (const auto* name : {"case89pegase", "case1354pegase"}) {
    CAPTURE(name);
    const auto net = build_network(ts::load(name));
    CHECK(ybus_gap(net) <= 1e-12);
  }
  for (unsigned seed = 1; seed <= 50; ++seed) {
    CAPTURE(seed);
    const auto net = build_network(ts::random_case(seed, 10));
    CHECK(ybus_gap(net) <= 1e-12);
  }
}

TEST_CASE("Ybus symmetry tracks taps and shifts") {
  const auto is_symmetric = [](const SparseComplex& y) {
    const Eigen::MatrixXcd d(y);
    return (d - d.transpose()).cwiseAbs().maxCoeff() < 1e-14;
  };
  auto c = ts::random_case(3, 8, false);
  CHECK(is_symmetric(build_admittance(build_network(c)).ybus));
  c.branch.rows[2][branch_col::tap] = 1.02;
  CHECK(is_symmetric(build_admittance(build_network(c)).ybus));
  c.branch.rows[2][branch_col::shift] = 3.0;
  CHECK_FALSE(is_symmetric(build_admittance(build_network(c)).ybus));
}

TEST_CASE("a lossless pass-through bus injects nothing at flat voltage") {
  auto c = ts::random_case(5, 6, false);
  c.bus.rows.push_back(ts::bus_row(7, 1, 0, 0));
  c.branch.rows.push_back(ts::branch_row(1, 7, 0.01, 0.1));
  const auto net = build_network(c);
  REQUIRE(net.buses.size() == 7);
  const auto adm = build_admittance(net);
  const Eigen::VectorXcd v = Eigen::VectorXcd::Ones(7);
  const auto s = bus_injections(adm.ybus, v);
  CHECK(std::abs(s[6]) < 1e-12);
}

TEST_CASE("model errors and exclusions") {
  SUBCASE("no reference bus") {
    auto c = ts::two_bus();
    c.bus.rows[0][bus_col::type] = 2;
    CHECK_THROWS_AS(build_network(c), ModelError);
  }
  SUBCASE("zero impedance") {
    auto c = ts::two_bus(0.0, 0.0);
    CHECK_THROWS_AS(build_network(c), ModelError);
  }
  SUBCASE("isolated bus dropped with its load reported") {
    auto c = ts::two_bus();
    c.bus.rows.push_back(ts::bus_row(3, 4, 25, 0));
    const auto net = build_network(c);
    CHECK(net.buses.size() == 2);
    CHECK(net.excluded_load_mw == 25.0);
    CHECK(net.warnings.size() == 1);
  }
  SUBCASE("out-of-service elements") {
    auto c = ts::two_bus();
    c.branch.rows.push_back(ts::branch_row(1, 2, 0.02, 0.2, 0, 0, 0, 0, 0));
    c.gen.rows.push_back(ts::gen_row(2, 0, 10));
    c.gen.rows.back()[gen_col::status] = 0;
    const auto net = build_network(c);
    CHECK(net.branches.size() == 1);
    CHECK(net.gens.size() == 1);
  }
}

TEST_CASE("statistics reproduce the published tables") {
  SUBCASE("general figures") {
    const struct {
      const char* name;
      std::size_t bus, gen, branch, xf;
    } rows[] = {{"case89pegase", 89, 12, 210, 32},
                {"case1354pegase", 1354, 260, 1991, 234},
                {"case2869pegase", 2869, 510, 4582, 496},
                {"case9241pegase", 9241, 1445, 16049, 1319}};
    for (const auto& r : rows) {
      CAPTURE(r.name);
      const auto c = ts::load(r.name);
      const auto s = compute_stats(build_network(c), c);
      CHECK(s.n_bus == r.bus);
      CHECK(s.n_gen == r.gen);
      CHECK(s.n_branch == r.branch);
      CHECK(s.n_transformer == r.xf);
    }
  }
  SUBCASE("voltage levels") {
    const struct {
      const char* name;
      std::array<std::size_t, 5> h;
    } rows[] = {{"case89pegase", {50, 5, 34, 0, 0}},
                {"case1354pegase", {241, 1113, 0, 0, 0}},
                {"case2869pegase", {629, 1748, 492, 0, 0}},
                {"case9241pegase", {1945, 3185, 4111, 0, 0}}};
    for (const auto& r : rows) {
      CAPTURE(r.name);
      const auto c = ts::load(r.name);
      const auto s = compute_stats(build_network(c), c);
      CHECK(s.voltage_histogram == r.h);
      CHECK(std::accumulate(s.voltage_histogram.begin(), s.voltage_histogram.end(),
                            std::size_t{0}) == s.n_bus);
    }
  }
  SUBCASE("negative R and X") {
    const auto c = ts::load("case9241pegase");
    const auto s = compute_stats(build_network(c), c);
    CHECK(s.n_neg_r == 75);
    CHECK(s.n_neg_x == 16);
  }
  SUBCASE("total load") {
    const auto c = ts::load("case1354pegase");
    const auto s = compute_stats(build_network(c), c);
    CHECK(std::abs(s.total_load_mw - 73059.7) <= 0.1);
  }
}

TEST_CASE("voltage classes") {
  CHECK(voltage_class(750) == VoltageClass::kv330_plus);
  CHECK(voltage_class(380) == VoltageClass::kv330_plus);
  CHECK(voltage_class(330) == VoltageClass::kv330_plus);
  CHECK(voltage_class(225) == VoltageClass::kv220_225);
  CHECK(voltage_class(154) == VoltageClass::kv90_154);
  CHECK(voltage_class(90) == VoltageClass::kv90_154);
  CHECK(voltage_class(63) == VoltageClass::kv45_63);
  CHECK(voltage_class(45) == VoltageClass::kv45_63);
  CHECK(voltage_class(27) == VoltageClass::kv27_minus);
  CHECK(voltage_class(0) == VoltageClass::kv27_minus);
}

TEST_CASE("statistics do not depend on row order") {
  auto c = ts::load("case89pegase");
  const auto before = compute_stats(build_network(c), c);
  std::mt19937 rng(7);
  std::shuffle(c.bus.rows.begin(), c.bus.rows.end(), rng);
  std::shuffle(c.branch.rows.begin(), c.branch.rows.end(), rng);
  const auto after = compute_stats(build_network(c), c);
  CHECK(after.n_transformer == before.n_transformer);
  CHECK(after.voltage_histogram == before.voltage_histogram);
  CHECK(after.n_neg_r == before.n_neg_r);
  CHECK(after.n_neg_x == before.n_neg_x);
  CHECK(after.total_load_mw == doctest::Approx(before.total_load_mw));
  CHECK(after.impedance_profile == before.impedance_profile);
}

TEST_CASE("profile CSV") {
  SUBCASE("impedances sorted descending") {
    const auto c = ts::load("case2869pegase");
    const auto s = compute_stats(build_network(c), c);
    std::vector<double> raw;
    for (const auto& row : c.branch.rows)
      raw.push_back(std::hypot(row[branch_col::r], row[branch_col::x]));
    std::sort(raw.begin(), raw.end());
    std::reverse(raw.begin(), raw.end());
    CHECK(s.impedance_profile == raw);

    const auto csv = emit_profiles(s);
    std::istringstream in(csv.impedance);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "rank,impedance_pu");
    CHECK(std::stod(first.substr(first.find(',') + 1)) == doctest::Approx(raw.front()));
  }
  SUBCASE("flat voltages") {
    const auto c = ts::two_bus();
    const auto csv = emit_profiles(compute_stats(build_network(c), c));
    CHECK(csv.voltage == "bus_id,v_real,v_imag\n1,1,0\n2,1,0\n");
  }
}
