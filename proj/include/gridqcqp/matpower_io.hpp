#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridqcqp {

/// Column positions of the MATPOWER version '2' tables (0-based).
namespace bus_col {
inline constexpr std::size_t id = 0, type = 1, pd = 2, qd = 3, gs = 4, bs = 5,
                             area = 6, vm = 7, va = 8, base_kv = 9, zone = 10,
                             vmax = 11, vmin = 12;
inline constexpr std::size_t min_columns = 13;
}  // namespace bus_col

namespace gen_col {
inline constexpr std::size_t bus = 0, pg = 1, qg = 2, qmax = 3, qmin = 4,
                             vg = 5, mbase = 6, status = 7, pmax = 8, pmin = 9;
inline constexpr std::size_t min_columns = 10;
}  // namespace gen_col

namespace branch_col {
inline constexpr std::size_t from = 0, to = 1, r = 2, x = 3, b = 4, rate_a = 5,
                             rate_b = 6, rate_c = 7, tap = 8, shift = 9,
                             status = 10, angmin = 11, angmax = 12;
inline constexpr std::size_t min_columns = 11;
}  // namespace branch_col

namespace gencost_col {
inline constexpr std::size_t model = 0, startup = 1, shutdown = 2, n = 3,
                             first_coefficient = 4;
inline constexpr std::size_t min_columns = 4;
}  // namespace gencost_col

enum class BusType : int { pq = 1, pv = 2, ref = 3, isolated = 4 };

/// A numeric matrix read row by row. All rows share the same width; columns
/// beyond the ones this library interprets are kept verbatim.
struct Table {
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  std::size_t columns() const noexcept {
    return rows.empty() ? 0 : rows.front().size();
  }
  double at(std::size_t row, std::size_t col) const {
    return rows.at(row).at(col);
  }

  friend bool operator==(const Table&, const Table&) = default;
};

/// Raw tabular image of a MATPOWER case file.
struct CaseData {
  std::string name;
  double base_mva = 100.0;
  Table bus;
  Table gen;
  Table branch;
  Table gencost;  // may be empty

  friend bool operator==(const CaseData&, const CaseData&) = default;
};

/// Parses the body of a MATPOWER version '2' case function.
///
/// Comments (`%` to end of line), blank lines and fields other than
/// `version`, `baseMVA`, `bus`, `gen`, `branch` and `gencost` are skipped.
/// Numbers are read with a locale-independent parser.
///
/// Throws ParseError (with line number) for malformed rows, StructureError for
/// a missing mandatory table and UnsupportedFormatError when the version tag
/// is absent or not '2'.
CaseData parse_case(std::string_view text, std::string_view fallback_name = "");

/// Reads and parses a case file; the case name defaults to the file stem.
CaseData load_case_file(const std::filesystem::path& path);

/// Serializes a case as MATPOWER text. Numbers are written in shortest
/// round-trip form, so parse_case(write_case(c)) == c.
std::string write_case(const CaseData& c);

/// Sets Pmin to zero for every generator whose Pmin is negative.
/// Returns the transformed case and the number of rows modified.
std::pair<CaseData, std::size_t> clamp_negative_pmin(CaseData c);

/// Checks the structural invariants of a case and returns one message per
/// violation (empty when the case is consistent).
std::vector<std::string> validate_case(const CaseData& c);

/// Same as validate_case but throws StructureError on the first violation.
void require_valid_case(const CaseData& c);

}  // namespace gridqcqp
