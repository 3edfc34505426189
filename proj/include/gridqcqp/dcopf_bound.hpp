#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridqcqp/network.hpp"

namespace gridqcqp {

/// DC lower bound on the AC objective.
struct LowerBound {
  double value = 0.0;  // MW-weighted cost
  bool valid = true;   // false when the raw case has a branch with r < 0
  std::string reason;
  std::vector<double> dispatch_mw;  // per in-service generator
};

/// Per-generator linear costs of the network, or all ones.
std::vector<double> network_costs(const Network& net);
std::vector<double> unit_costs(const Network& net);

/// Merit-order solution of min Σ c_i p_i s.t. Σ p_i = D, Pmin_i <= p_i <=
/// Pmax_i, where D is the total load plus the shunt conductance load at
/// 1 pu. Throws InfeasibleBoundError when D lies outside [Σ Pmin, Σ Pmax];
/// the error carries the shortfall in MW.
LowerBound dcopf_no_flow_limits(const Network& net,
                                const std::vector<double>& costs);

/// Demand served by the DC dispatch, pu.
double dc_demand(const Network& net);

/// Gap between an upper bound and a lower bound as a percentage of the
/// lower bound; nullopt when the bound is not valid. Throws UndefinedGapError
/// when lb.value <= 0 and std::invalid_argument when ub < 0.
std::optional<double> gap_percent(const LowerBound& lb, double ub);

/// "1.47%" or "not valid".
std::string format_gap(const std::optional<double>& gap, int decimals = 2);

}  // namespace gridqcqp
