#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "gridqcqp/matpower_io.hpp"

namespace gridqcqp {

using Complex = std::complex<double>;

/// In-service bus, quantities in per unit on the system base.
struct Bus {
  std::size_t index = 0;  // position in Network::buses
  long long id = 0;       // external bus number from the case file
  BusType type = BusType::pq;
  double pd = 0.0, qd = 0.0;  // load
  double gs = 0.0, bs = 0.0;  // nodal shunt at 1 pu voltage
  double vmin = 0.0, vmax = 0.0;
  double base_kv = 0.0;
  Complex v_stored{1.0, 0.0};  // Vm∠Va from the case file
};

struct Generator {
  std::size_t bus = 0;         // internal bus index
  std::size_t source_row = 0;  // row in CaseData::gen
  double pg = 0.0, qg = 0.0;   // scheduled output
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  double vg = 1.0;          // voltage set point
  double cost = 1.0;        // linear cost per MW of active output
};

struct Branch {
  std::size_t from = 0, to = 0;
  std::size_t source_row = 0;
  double r = 0.0, x = 0.0;
  Complex y{0.0, 0.0};  // series admittance 1/(r + jx)
  double b = 0.0;       // total line charging susceptance
  double tap = 1.0;     // off-nominal ratio magnitude (raw 0 mapped to 1)
  double shift = 0.0;   // phase shift, radians
  double rate = 0.0;    // rateA in pu; 0 means unlimited
};

/// Validated per-unit network restricted to in-service elements connected to
/// the slack bus.
struct Network {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> gens;
  std::vector<Branch> branches;
  std::size_t slack = 0;

  /// Elements dropped while building, one message each.
  std::vector<std::string> warnings;
  /// Active load (MW) sitting on excluded buses.
  double excluded_load_mw = 0.0;
  /// Branch rows of the raw case with r < 0 / x < 0, whatever their status.
  std::size_t raw_negative_r = 0;
  std::size_t raw_negative_x = 0;

  std::size_t bus_count() const noexcept { return buses.size(); }
  /// Generators attached to each bus.
  std::vector<std::vector<std::size_t>> gens_by_bus() const;
  /// True for buses with at least one generator.
  std::vector<bool> generator_bus_mask() const;
};

/// Converts the raw case to a per-unit network. Out-of-service branches and
/// generators, type-4 buses and buses not reachable from the reference bus
/// are left out and listed in Network::warnings.
///
/// Throws ModelError when no reference bus is connected or an in-service
/// branch has zero series impedance.
Network build_network(const CaseData& c);

/// Two-port admittance of one branch: [If; It] = [yff yft; ytf ytt][Vf; Vt].
struct BranchAdmittance {
  Complex yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const Branch& br);

using SparseComplex = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct AdmittanceModel {
  SparseComplex ybus;                     // nbus x nbus
  SparseComplex yf;                       // nbranch x nbus, from-end currents
  SparseComplex yt;                       // nbranch x nbus, to-end currents
  std::vector<BranchAdmittance> blocks;   // per branch
};

/// Scatter-adds the branch blocks and nodal shunts into the bus admittance
/// matrix.
AdmittanceModel build_admittance(const Network& net);

/// Complex power injected at every bus, S = diag(V) conj(Ybus V).
Eigen::VectorXcd bus_injections(const SparseComplex& ybus,
                                const Eigen::VectorXcd& v);

}  // namespace gridqcqp
