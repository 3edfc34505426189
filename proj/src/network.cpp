#include "gridqcqp/network.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <unordered_map>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Linear active-power coefficient of one gencost row (per MW).
double linear_cost(const std::vector<double>& row, std::vector<std::string>& warnings,
                   std::size_t g) {
  const int model = static_cast<int>(row[gencost_col::model]);
  const auto n = static_cast<std::size_t>(row[gencost_col::n]);
  const auto first = gencost_col::first_coefficient;
  if (model == 2) {
    // Coefficients c(n-1) ... c0; higher-degree terms are ignored.
    if (n < 2 || first + n > row.size()) return 0.0;
    return row[first + n - 2];
  }
  if (model == 1 && n >= 2 && first + 2 * n <= row.size()) {
    const double x0 = row[first], y0 = row[first + 1];
    const double x1 = row[first + 2 * n - 2], y1 = row[first + 2 * n - 1];
    warnings.push_back("gen row " + std::to_string(g + 1) +
                       ": piecewise-linear cost reduced to its average slope");
    return x1 != x0 ? (y1 - y0) / (x1 - x0) : 0.0;
  }
  warnings.push_back("gen row " + std::to_string(g + 1) +
                     ": unsupported cost model, unit cost assumed");
  return 1.0;
}

}  // namespace

std::vector<std::vector<std::size_t>> Network::gens_by_bus() const {
  std::vector<std::vector<std::size_t>> out(buses.size());
  for (std::size_t g = 0; g < gens.size(); ++g) out[gens[g].bus].push_back(g);
  return out;
}

std::vector<bool> Network::generator_bus_mask() const {
  std::vector<bool> mask(buses.size(), false);
  for (const auto& g : gens) mask[g.bus] = true;
  return mask;
}

Network build_network(const CaseData& c) {
  if (!(c.base_mva > 0.0)) throw ModelError("baseMVA must be positive");
  Network net;
  net.name = c.name;
  net.base_mva = c.base_mva;
  const double base = c.base_mva;

  for (const auto& row : c.branch.rows) {
    if (row[branch_col::r] < 0.0) ++net.raw_negative_r;
    if (row[branch_col::x] < 0.0) ++net.raw_negative_x;
  }

  // Raw bus id -> raw row.
  std::unordered_map<long long, std::size_t> row_of;
  for (std::size_t i = 0; i < c.bus.size(); ++i)
    row_of.emplace(static_cast<long long>(c.bus.rows[i][bus_col::id]), i);
  const auto raw_type = [&](std::size_t i) {
    return static_cast<BusType>(static_cast<int>(c.bus.rows[i][bus_col::type]));
  };

  // Adjacency over in-service branches between non-isolated buses.
  std::vector<std::vector<std::size_t>> adj(c.bus.size());
  for (std::size_t k = 0; k < c.branch.size(); ++k) {
    const auto& row = c.branch.rows[k];
    if (row[branch_col::status] <= 0) continue;
    const auto f = row_of.find(static_cast<long long>(row[branch_col::from]));
    const auto t = row_of.find(static_cast<long long>(row[branch_col::to]));
    if (f == row_of.end() || t == row_of.end())
      throw ModelError("branch row " + std::to_string(k + 1) +
                       " references an unknown bus");
    if (raw_type(f->second) == BusType::isolated ||
        raw_type(t->second) == BusType::isolated)
      continue;
    adj[f->second].push_back(t->second);
    adj[t->second].push_back(f->second);
  }

  std::size_t ref_row = c.bus.size();
  for (std::size_t i = 0; i < c.bus.size(); ++i) {
    if (raw_type(i) != BusType::ref) continue;
    if (ref_row == c.bus.size()) {
      ref_row = i;
    } else {
      net.warnings.push_back("additional reference bus " +
                             format_number(c.bus.rows[i][bus_col::id]) +
                             " treated as PV");
    }
  }
  if (ref_row == c.bus.size())
    throw ModelError("no reference bus among in-service buses");

  std::vector<bool> reached(c.bus.size(), false);
  std::queue<std::size_t> frontier;
  reached[ref_row] = true;
  frontier.push(ref_row);
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop();
    for (const auto j : adj[i]) {
      if (!reached[j]) {
        reached[j] = true;
        frontier.push(j);
      }
    }
  }

  std::vector<std::size_t> index_of(c.bus.size(), SIZE_MAX);
  for (std::size_t i = 0; i < c.bus.size(); ++i) {
    const auto& row = c.bus.rows[i];
    if (!reached[i]) {
      net.excluded_load_mw += row[bus_col::pd];
      net.warnings.push_back("bus " + format_number(row[bus_col::id]) +
                             " excluded (isolated or disconnected)");
      continue;
    }
    Bus b;
    b.index = net.buses.size();
    b.id = static_cast<long long>(row[bus_col::id]);
    b.type = raw_type(i);
    if (b.type == BusType::ref && i != ref_row) b.type = BusType::pv;
    b.pd = row[bus_col::pd] / base;
    b.qd = row[bus_col::qd] / base;
    b.gs = row[bus_col::gs] / base;
    b.bs = row[bus_col::bs] / base;
    b.vmin = row[bus_col::vmin];
    b.vmax = row[bus_col::vmax];
    b.base_kv = row[bus_col::base_kv];
    b.v_stored = std::polar(row[bus_col::vm], row[bus_col::va] * kDegToRad);
    index_of[i] = b.index;
    if (i == ref_row) net.slack = b.index;
    net.buses.push_back(b);
  }

  for (std::size_t k = 0; k < c.branch.size(); ++k) {
    const auto& row = c.branch.rows[k];
    if (row[branch_col::status] <= 0) continue;
    const auto f = row_of.at(static_cast<long long>(row[branch_col::from]));
    const auto t = row_of.at(static_cast<long long>(row[branch_col::to]));
    if (index_of[f] == SIZE_MAX || index_of[t] == SIZE_MAX) {
      net.warnings.push_back("branch row " + std::to_string(k + 1) +
                             " excluded (endpoint not in service)");
      continue;
    }
    Branch br;
    br.from = index_of[f];
    br.to = index_of[t];
    br.source_row = k;
    br.r = row[branch_col::r];
    br.x = row[branch_col::x];
    if (br.r == 0.0 && br.x == 0.0)
      throw ModelError("branch row " + std::to_string(k + 1) +
                       " has zero series impedance");
    br.y = 1.0 / Complex(br.r, br.x);
    br.b = row[branch_col::b];
    br.tap = row[branch_col::tap] == 0.0 ? 1.0 : row[branch_col::tap];
    if (!(br.tap > 0.0))
      throw ModelError("branch row " + std::to_string(k + 1) +
                       " has a non-positive tap ratio");
    br.shift = row[branch_col::shift] * kDegToRad;
    br.rate = row[branch_col::rate_a] / base;
    net.branches.push_back(br);
  }

  for (std::size_t g = 0; g < c.gen.size(); ++g) {
    const auto& row = c.gen.rows[g];
    if (row[gen_col::status] <= 0) continue;
    const auto it = row_of.find(static_cast<long long>(row[gen_col::bus]));
    if (it == row_of.end())
      throw ModelError("gen row " + std::to_string(g + 1) +
                       " references an unknown bus");
    if (index_of[it->second] == SIZE_MAX) {
      net.warnings.push_back("gen row " + std::to_string(g + 1) +
                             " excluded (bus not in service)");
      continue;
    }
    Generator gen;
    gen.bus = index_of[it->second];
    gen.source_row = g;
    gen.pg = row[gen_col::pg] / base;
    gen.qg = row[gen_col::qg] / base;
    gen.pmin = row[gen_col::pmin] / base;
    gen.pmax = row[gen_col::pmax] / base;
    gen.qmin = row[gen_col::qmin] / base;
    gen.qmax = row[gen_col::qmax] / base;
    gen.vg = row[gen_col::vg];
    gen.cost = g < c.gencost.size()
                   ? linear_cost(c.gencost.rows[g], net.warnings, g)
                   : 1.0;
    net.gens.push_back(gen);
  }
  if (c.gencost.empty() && !net.gens.empty())
    net.warnings.push_back("no gencost table, unit linear costs assumed");
  return net;
}

BranchAdmittance branch_admittance(const Branch& br) {
  const Complex tap = std::polar(br.tap, br.shift);
  const Complex ytt = br.y + Complex(0.0, br.b / 2.0);
  return {ytt / (br.tap * br.tap), -br.y / std::conj(tap), -br.y / tap, ytt};
}

AdmittanceModel build_admittance(const Network& net) {
  const auto nb = static_cast<Eigen::Index>(net.buses.size());
  const auto nl = static_cast<Eigen::Index>(net.branches.size());
  AdmittanceModel m;
  m.blocks.reserve(net.branches.size());

  std::vector<Eigen::Triplet<Complex>> ybus, yf, yt;
  ybus.reserve(4 * net.branches.size() + net.buses.size());
  for (Eigen::Index k = 0; k < nl; ++k) {
    const auto& br = net.branches[static_cast<std::size_t>(k)];
    const auto blk = branch_admittance(br);
    m.blocks.push_back(blk);
    const auto f = static_cast<Eigen::Index>(br.from);
    const auto t = static_cast<Eigen::Index>(br.to);
    ybus.emplace_back(f, f, blk.yff);
    ybus.emplace_back(f, t, blk.yft);
    ybus.emplace_back(t, f, blk.ytf);
    ybus.emplace_back(t, t, blk.ytt);
    yf.emplace_back(k, f, blk.yff);
    yf.emplace_back(k, t, blk.yft);
    yt.emplace_back(k, f, blk.ytf);
    yt.emplace_back(k, t, blk.ytt);
  }
  for (const auto& b : net.buses) {
    const auto i = static_cast<Eigen::Index>(b.index);
    ybus.emplace_back(i, i, Complex(b.gs, b.bs));
  }
  m.ybus.resize(nb, nb);
  m.ybus.setFromTriplets(ybus.begin(), ybus.end());
  m.yf.resize(nl, nb);
  m.yf.setFromTriplets(yf.begin(), yf.end());
  m.yt.resize(nl, nb);
  m.yt.setFromTriplets(yt.begin(), yt.end());
  return m;
}

Eigen::VectorXcd bus_injections(const SparseComplex& ybus,
                                const Eigen::VectorXcd& v) {
  const Eigen::VectorXcd current = ybus * v;
  return v.cwiseProduct(current.conjugate());
}

}  // namespace gridqcqp
