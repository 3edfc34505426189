#include "gridqcqp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

VoltageClass voltage_class(double base_kv) {
  if (base_kv >= 330.0) return VoltageClass::kv330_plus;
  if (base_kv >= 187.0) return VoltageClass::kv220_225;
  if (base_kv >= 76.5) return VoltageClass::kv90_154;
  if (base_kv >= 36.0) return VoltageClass::kv45_63;
  return VoltageClass::kv27_minus;
}

std::string voltage_class_label(VoltageClass c) {
  switch (c) {
    case VoltageClass::kv330_plus: return ">=330kV";
    case VoltageClass::kv220_225: return "220-225kV";
    case VoltageClass::kv90_154: return "90-154kV";
    case VoltageClass::kv45_63: return "45-63kV";
    case VoltageClass::kv27_minus: return "<=27kV";
  }
  return "?";
}

bool is_transformer(const std::vector<double>& branch_row) {
  const double tap = branch_row[branch_col::tap];
  return tap != 0.0 && tap != 1.0;
}

CaseStats compute_stats(const Network& net, const CaseData& c) {
  CaseStats s;
  s.case_name = c.name;
  s.n_bus = c.bus.size();
  s.n_gen = c.gen.size();
  s.n_branch = c.branch.size();
  for (const auto& row : c.branch.rows) {
    if (is_transformer(row)) ++s.n_transformer;
    if (row[branch_col::r] < 0.0) ++s.n_neg_r;
    if (row[branch_col::x] < 0.0) ++s.n_neg_x;
    s.impedance_profile.push_back(
        std::hypot(row[branch_col::r], row[branch_col::x]));
  }
  std::sort(s.impedance_profile.begin(), s.impedance_profile.end(),
            std::greater<>());

  constexpr double deg = std::numbers::pi / 180.0;
  for (const auto& row : c.bus.rows) {
    ++s.voltage_histogram[static_cast<std::size_t>(
        voltage_class(row[bus_col::base_kv]))];
    s.total_load_mw += row[bus_col::pd];
    s.voltage_profile.push_back(
        {static_cast<long long>(row[bus_col::id]),
         std::polar(row[bus_col::vm], row[bus_col::va] * deg)});
  }

  s.in_service_buses = net.buses.size();
  s.in_service_gens = net.gens.size();
  s.in_service_branches = net.branches.size();
  s.model_warnings = net.warnings.size();
  return s;
}

ProfileCsv emit_profiles(const CaseStats& stats) {
  ProfileCsv out;
  std::ostringstream imp;
  imp << "rank,impedance_pu\n";
  for (std::size_t i = 0; i < stats.impedance_profile.size(); ++i)
    imp << (i + 1) << ',' << format_number(stats.impedance_profile[i]) << '\n';
  out.impedance = imp.str();

  std::ostringstream volt;
  volt << "bus_id,v_real,v_imag\n";
  for (const auto& p : stats.voltage_profile)
    volt << p.bus_id << ',' << format_number(p.v.real() + 0.0) << ','
         << format_number(p.v.imag() + 0.0) << '\n';  // no "-0"
  out.voltage = volt.str();
  return out;
}

}  // namespace gridqcqp
