#include "gridqcqp/dcopf_bound.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

std::vector<double> network_costs(const Network& net) {
  std::vector<double> c;
  c.reserve(net.gens.size());
  for (const auto& g : net.gens) c.push_back(g.cost);
  return c;
}

std::vector<double> unit_costs(const Network& net) {
  return std::vector<double>(net.gens.size(), 1.0);
}

double dc_demand(const Network& net) {
  double d = 0.0;
  for (const auto& b : net.buses) d += b.pd + b.gs;
  return d;
}

LowerBound dcopf_no_flow_limits(const Network& net,
                                const std::vector<double>& costs) {
  if (costs.size() != net.gens.size())
    throw DimensionError("cost vector has " + std::to_string(costs.size()) +
                         " entries for " + std::to_string(net.gens.size()) +
                         " generators");
  const double demand = dc_demand(net);
  double pmin = 0.0, pmax = 0.0;
  for (const auto& g : net.gens) {
    pmin += g.pmin;
    pmax += g.pmax;
  }
  if (demand < pmin || demand > pmax) {
    const double shortfall = demand > pmax ? demand - pmax : pmin - demand;
    throw InfeasibleBoundError(
        "demand " + format_fixed(demand * net.base_mva, 1) +
            " MW outside generator capability [" +
            format_fixed(pmin * net.base_mva, 1) + ", " +
            format_fixed(pmax * net.base_mva, 1) + "] MW",
        shortfall * net.base_mva);
  }

  std::vector<double> p(net.gens.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = net.gens[i].pmin;
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  double remaining = demand - pmin;
  for (const auto i : order) {
    if (remaining <= 0.0) break;
    const double add = std::min(remaining, net.gens[i].pmax - net.gens[i].pmin);
    p[i] += add;
    remaining -= add;
  }

  LowerBound lb;
  for (std::size_t i = 0; i < p.size(); ++i) {
    lb.value += costs[i] * p[i] * net.base_mva;
    lb.dispatch_mw.push_back(p[i] * net.base_mva);
  }
  if (net.raw_negative_r > 0) {
    lb.valid = false;
    lb.reason = std::to_string(net.raw_negative_r) +
                " branches with negative resistance present";
  }
  return lb;
}

std::optional<double> gap_percent(const LowerBound& lb, double ub) {
  if (ub < 0.0) throw std::invalid_argument("upper bound must be nonnegative");
  if (!lb.valid) return std::nullopt;
  if (lb.value <= 0.0)
    throw UndefinedGapError("gap undefined for lower bound " +
                            format_number(lb.value));
  return 100.0 * (ub - lb.value) / lb.value;
}

std::string format_gap(const std::optional<double>& gap, int decimals) {
  return gap ? format_fixed(*gap, decimals) + "%" : "not valid";
}

}  // namespace gridqcqp
