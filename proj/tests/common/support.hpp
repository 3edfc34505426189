#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gridqcqp/matpower_io.hpp"
#include "gridqcqp/network.hpp"

namespace test_support {

inline std::filesystem::path case_path(const std::string& name) {
  return std::filesystem::path(GRIDQCQP_CASE_DIR) / (name + ".m");
}

inline gridqcqp::CaseData load(const std::string& name) {
  return gridqcqp::load_case_file(case_path(name));
}

inline std::vector<double> bus_row(double id, double type, double pd, double qd,
                                   double vmin = 0.9, double vmax = 1.1,
                                   double gs = 0.0, double bs = 0.0,
                                   double vm = 1.0, double va = 0.0,
                                   double base_kv = 380.0) {
  return {id, type, pd, qd, gs, bs, 1, vm, va, base_kv, 1, vmax, vmin};
}

inline std::vector<double> gen_row(double bus, double pg, double pmax,
                                   double pmin = 0.0, double qmax = 100.0,
                                   double qmin = -100.0, double vg = 1.0,
                                   double qg = 0.0) {
  return {bus, pg, qg, qmax, qmin, vg, 100, 1, pmax, pmin};
}

inline std::vector<double> branch_row(double from, double to, double r,
                                      double x, double b = 0.0,
                                      double rate = 0.0, double tap = 0.0,
                                      double shift = 0.0, double status = 1.0) {
  return {from, to, r, x, b, rate, rate, rate, tap, shift, status, -360, 360};
}

/// Linear unit-cost gencost rows.
inline gridqcqp::Table unit_gencost(std::size_t n_gen) {
  gridqcqp::Table t;
  for (std::size_t g = 0; g < n_gen; ++g) t.rows.push_back({2, 0, 0, 2, 1, 0});
  return t;
}

/// 2-bus case: REF bus 1 with a generator, PQ bus 2 with load pd + j qd,
/// one branch r + jx.
inline gridqcqp::CaseData two_bus(double r = 0.01, double x = 0.1,
                                  double pd = 100.0, double qd = 0.0) {
  gridqcqp::CaseData c;
  c.name = "two_bus";
  c.base_mva = 100.0;
  c.bus.rows = {bus_row(1, 3, 0, 0), bus_row(2, 1, pd, qd)};
  c.gen.rows = {gen_row(1, pd, 1000)};
  c.branch.rows = {branch_row(1, 2, r, x)};
  c.gencost = unit_gencost(1);
  return c;
}

/// Random connected network: a spanning tree plus chords, random taps,
/// shifts, shunts and loads; bus 1 is the reference with a generator.
inline gridqcqp::CaseData random_case(unsigned seed, int n_bus,
                                      bool transformers = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gridqcqp::CaseData c;
  c.name = "random_" + std::to_string(seed);
  c.base_mva = 100.0;
  for (int i = 1; i <= n_bus; ++i) {
    const bool gen_bus = i == 1 || u(rng) < 0.3;
    c.bus.rows.push_back(bus_row(i, i == 1 ? 3 : (gen_bus ? 2 : 1),
                                 100.0 * u(rng), 40.0 * (u(rng) - 0.3), 0.94,
                                 1.06, u(rng) < 0.3 ? 5.0 * u(rng) : 0.0,
                                 u(rng) < 0.3 ? 20.0 * (u(rng) - 0.5) : 0.0,
                                 0.95 + 0.1 * u(rng), 10.0 * (u(rng) - 0.5)));
    if (gen_bus)
      c.gen.rows.push_back(gen_row(i, 100.0 * u(rng), 400.0, 0.0, 300.0,
                                   -300.0, 0.98 + 0.04 * u(rng)));
  }
  const auto add_branch = [&](int a, int b) {
    const bool xf = transformers && u(rng) < 0.3;
    c.branch.rows.push_back(branch_row(
        a, b, 0.002 + 0.02 * u(rng), 0.02 + 0.1 * u(rng), 0.1 * u(rng),
        200.0 + 300.0 * u(rng), xf ? 0.9 + 0.2 * u(rng) : 0.0,
        xf && u(rng) < 0.5 ? 10.0 * (u(rng) - 0.5) : 0.0));
  };
  for (int i = 2; i <= n_bus; ++i)
    add_branch(1 + static_cast<int>(u(rng) * (i - 1)), i);
  for (int k = 0; k < n_bus / 2; ++k) {
    const int a = 1 + static_cast<int>(u(rng) * n_bus);
    const int b = 1 + static_cast<int>(u(rng) * n_bus);
    if (a != b) add_branch(a, b);
  }
  c.gencost = unit_gencost(c.gen.rows.size());
  return c;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace test_support
