#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "gridqcqp/matpower_io.hpp"
#include "gridqcqp/network.hpp"

namespace gridqcqp {

/// Voltage classes of the nodes-per-level table, highest first.
enum class VoltageClass : std::size_t {
  kv330_plus = 0,  // >= 330 kV
  kv220_225,       // 220/225 kV
  kv90_154,        // 90 .. 154 kV
  kv45_63,         // 45 .. 63 kV
  kv27_minus,      // <= 27 kV (and unknown, baseKV 0)
};
inline constexpr std::size_t kVoltageClassCount = 5;

/// Class of a nominal voltage. Boundaries sit halfway between neighbouring
/// classes: 330, 187, 76.5 and 36 kV.
VoltageClass voltage_class(double base_kv);

std::string voltage_class_label(VoltageClass c);

/// A branch row counts as a transformer when its raw ratio is neither 0 nor 1.
bool is_transformer(const std::vector<double>& branch_row);

struct VoltagePoint {
  long long bus_id = 0;
  std::complex<double> v;
};

struct CaseStats {
  std::string case_name;
  // Counts over the raw published tables.
  std::size_t n_bus = 0, n_gen = 0, n_branch = 0, n_transformer = 0;
  std::array<std::size_t, kVoltageClassCount> voltage_histogram{};
  std::size_t n_neg_r = 0, n_neg_x = 0;
  double total_load_mw = 0.0;           // sum of Pd over all bus rows
  std::vector<double> impedance_profile;  // |r + jx| per branch, descending
  std::vector<VoltagePoint> voltage_profile;
  // Size of the in-service network built from the case.
  std::size_t in_service_buses = 0, in_service_gens = 0,
              in_service_branches = 0;
  std::size_t model_warnings = 0;
};

/// Descriptive statistics of a case. Table counts come from the raw case
/// rows, status-0 rows included; the in-service figures come from `net`.
CaseStats compute_stats(const Network& net, const CaseData& c);

struct ProfileCsv {
  std::string impedance;  // rank,impedance_pu
  std::string voltage;    // bus_id,v_real,v_imag
};

/// CSV data for the impedance and voltage plots.
ProfileCsv emit_profiles(const CaseStats& stats);

}  // namespace gridqcqp
