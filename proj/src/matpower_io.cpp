#include "gridqcqp/matpower_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view line) {
  const auto p = line.find('%');
  return p == std::string_view::npos ? line : line.substr(0, p);
}

struct Line {
  std::string_view text;
  std::size_t number;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0, number = 1;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back({text.substr(start, end - start), number++});
    start = end + 1;
  }
  return lines;
}

std::size_t minimum_columns(std::string_view table) {
  if (table == "bus") return bus_col::min_columns;
  if (table == "gen") return gen_col::min_columns;
  if (table == "branch") return branch_col::min_columns;
  return gencost_col::min_columns;
}

// Accumulates matrix rows; a row ends at ';', at a newline or at ']'.
class MatrixReader {
 public:
  explicit MatrixReader(std::string table) : table_(std::move(table)) {}

  // Feeds one comment-stripped fragment. Returns true when ']' was consumed;
  // `rest` then receives whatever followed the bracket.
  bool feed(std::string_view s, std::size_t line, std::string_view* rest) {
    std::size_t i = 0;
    while (i < s.size()) {
      const char ch = s[i];
      if (ch == ']') {
        flush(line);
        *rest = s.substr(i + 1);
        return true;
      }
      if (ch == ';') {
        flush(line);
        ++i;
        continue;
      }
      if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
        ++i;
        continue;
      }
      if (s.substr(i, 3) == "...") {  // continuation: row goes on
        i = s.size();
        continued_ = true;
        continue;
      }
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',' &&
             s[j] != ';' && s[j] != ']' && s[j] != '\r')
        ++j;
      const auto token = s.substr(i, j - i);
      const auto value = parse_number(token);
      if (!value)
        throw ParseError("invalid number '" + std::string(token) +
                             "' in matrix '" + table_ + "'",
                         line);
      current_.push_back(*value);
      if (current_.size() == 1) row_line_ = line;
      i = j;
    }
    if (!continued_) flush(line);
    continued_ = false;
    return false;
  }

  Table take() { return std::move(result_); }

 private:
  void flush(std::size_t line) {
    if (current_.empty()) return;
    const auto at = row_line_ ? row_line_ : line;
    if (!result_.rows.empty() && current_.size() != result_.columns())
      throw ParseError("matrix '" + table_ + "' row has " +
                           std::to_string(current_.size()) +
                           " columns, expected " +
                           std::to_string(result_.columns()),
                       at);
    if (current_.size() < minimum_columns(table_))
      throw ParseError("matrix '" + table_ + "' row has " +
                           std::to_string(current_.size()) +
                           " columns, at least " +
                           std::to_string(minimum_columns(table_)) +
                           " required",
                       at);
    result_.rows.push_back(std::move(current_));
    current_.clear();
    row_line_ = 0;
  }

  std::string table_;
  Table result_;
  std::vector<double> current_;
  std::size_t row_line_ = 0;
  bool continued_ = false;
};

// Returns the quoted content of `'...'`, or nullopt.
std::optional<std::string> quoted(std::string_view s) {
  const auto a = s.find('\'');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = s.find('\'', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(s.substr(a + 1, b - a - 1));
}

void write_table(std::ostringstream& out, std::string_view name,
                 std::string_view header, const Table& t) {
  out << "%% " << name << " data\n";
  if (!header.empty()) out << "%\t" << header << '\n';
  out << "mpc." << name << " = [\n";
  for (const auto& row : t.rows) {
    for (const double v : row) out << '\t' << format_number(v);
    out << ";\n";
  }
  out << "];\n\n";
}

}  // namespace

CaseData parse_case(std::string_view text, std::string_view fallback_name) {
  CaseData c;
  c.name = std::string(fallback_name);
  std::optional<std::string> version;
  std::optional<double> base_mva;
  std::set<std::string> seen;

  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    auto s = trim(strip_comment(lines[li].text));
    if (s.empty()) continue;

    if (s.starts_with("function")) {
      const auto eq = s.find('=');
      auto name = trim(eq == std::string_view::npos ? s.substr(8)
                                                    : s.substr(eq + 1));
      if (!name.empty()) c.name = std::string(name);
      continue;
    }
    if (!s.starts_with("mpc.")) continue;

    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected assignment", lines[li].number);
    const auto field = std::string(trim(s.substr(4, eq - 4)));
    auto rhs = trim(s.substr(eq + 1));

    if (field == "version") {
      version = quoted(rhs);
      if (!version) version = std::string(trim(rhs.substr(0, rhs.find(';'))));
      continue;
    }
    if (field == "baseMVA") {
      const auto token = trim(rhs.substr(0, rhs.find(';')));
      const auto v = parse_number(token);
      if (!v) throw ParseError("invalid baseMVA", lines[li].number);
      base_mva = *v;
      continue;
    }

    const bool known = field == "bus" || field == "gen" ||
                       field == "branch" || field == "gencost";
    const auto open = rhs.find_first_of("[{");
    if (open == std::string_view::npos) continue;  // scalar/string field
    const char close = rhs[open] == '[' ? ']' : '}';

    if (!known || close == '}') {
      // Skip an unrelated matrix or cell array up to its closing bracket.
      auto rest = rhs.substr(open + 1);
      int depth = 1;
      std::size_t lj = li;
      while (true) {
        for (const char ch : rest) {
          if (ch == '[' || ch == '{') ++depth;
          if (ch == ']' || ch == '}') --depth;
          if (depth == 0) break;
        }
        if (depth == 0) break;
        if (++lj >= lines.size())
          throw ParseError("unterminated field '" + field + "'",
                           lines[li].number);
        rest = strip_comment(lines[lj].text);
      }
      li = lj;
      continue;
    }

    if (seen.contains(field))
      throw StructureError("table '" + field + "' defined twice");
    seen.insert(field);

    MatrixReader reader(field);
    std::string_view rest;
    bool closed = reader.feed(rhs.substr(open + 1), lines[li].number, &rest);
    while (!closed) {
      if (++li >= lines.size())
        throw ParseError("unterminated matrix '" + field + "'",
                         lines.back().number);
      closed = reader.feed(strip_comment(lines[li].text), lines[li].number,
                           &rest);
    }
    Table t = reader.take();
    if (field == "bus") c.bus = std::move(t);
    if (field == "gen") c.gen = std::move(t);
    if (field == "branch") c.branch = std::move(t);
    if (field == "gencost") c.gencost = std::move(t);
  }

  if (!version)
    throw UnsupportedFormatError("missing mpc.version (only version '2' is "
                                 "supported)");
  if (*version != "2")
    throw UnsupportedFormatError("unsupported case format version '" +
                                 *version + "'");
  if (!base_mva) throw StructureError("missing mpc.baseMVA");
  for (const char* t : {"bus", "gen", "branch"})
    if (!seen.contains(t))
      throw StructureError(std::string("missing mandatory table mpc.") + t);
  c.base_mva = *base_mva;
  return c;
}

CaseData load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open case file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), path.stem().string());
}

std::string write_case(const CaseData& c) {
  std::ostringstream out;
  const std::string name = c.name.empty() ? "mpc_case" : c.name;
  out << "function mpc = " << name << "\n\n";
  out << "%% MATPOWER Case Format : Version 2\n";
  out << "mpc.version = '2';\n\n";
  out << "%%-----  Power Flow Data  -----%%\n";
  out << "%% system MVA base\n";
  out << "mpc.baseMVA = " << format_number(c.base_mva) << ";\n\n";
  write_table(out, "bus", "bus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin", c.bus);
  write_table(out, "gen", "bus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin", c.gen);
  write_table(out, "branch", "fbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax", c.branch);
  if (!c.gencost.empty()) {
    out << "%%-----  OPF Data  -----%%\n";
    write_table(out, "gencost", "", c.gencost);
  }
  return out.str();
}

std::pair<CaseData, std::size_t> clamp_negative_pmin(CaseData c) {
  std::size_t modified = 0;
  for (auto& row : c.gen.rows) {
    if (row[gen_col::pmin] < 0.0) {
      row[gen_col::pmin] = 0.0;
      ++modified;
    }
  }
  return {std::move(c), modified};
}

std::vector<std::string> validate_case(const CaseData& c) {
  std::vector<std::string> issues;
  if (!(c.base_mva > 0.0)) issues.push_back("baseMVA must be positive");

  std::map<long long, BusType> types;
  for (std::size_t i = 0; i < c.bus.size(); ++i) {
    const auto& row = c.bus.rows[i];
    const auto id = static_cast<long long>(row[bus_col::id]);
    if (!types.emplace(id, static_cast<BusType>(static_cast<int>(row[bus_col::type]))).second)
      issues.push_back("duplicate bus id " + std::to_string(id));
    if (row[bus_col::vmin] > row[bus_col::vmax])
      issues.push_back("bus " + std::to_string(id) + ": Vmin > Vmax");
  }
  for (std::size_t k = 0; k < c.branch.size(); ++k) {
    const auto& row = c.branch.rows[k];
    for (const auto col : {branch_col::from, branch_col::to}) {
      const auto id = static_cast<long long>(row[col]);
      if (!types.contains(id))
        issues.push_back("branch row " + std::to_string(k + 1) +
                         " references unknown bus " + std::to_string(id));
    }
  }
  for (std::size_t g = 0; g < c.gen.size(); ++g) {
    const auto& row = c.gen.rows[g];
    const auto id = static_cast<long long>(row[gen_col::bus]);
    if (!types.contains(id))
      issues.push_back("gen row " + std::to_string(g + 1) +
                       " references unknown bus " + std::to_string(id));
    if (row[gen_col::status] <= 0) continue;
    if (row[gen_col::qmin] > row[gen_col::qmax])
      issues.push_back("gen row " + std::to_string(g + 1) + ": Qmin > Qmax");
    if (row[gen_col::pmin] > row[gen_col::pmax])
      issues.push_back("gen row " + std::to_string(g + 1) + ": Pmin > Pmax");
  }
  const auto refs = std::count_if(types.begin(), types.end(), [](const auto& kv) {
    return kv.second == BusType::ref;
  });
  if (refs != 1)
    issues.push_back("expected exactly one reference bus, found " +
                     std::to_string(refs));
  return issues;
}

void require_valid_case(const CaseData& c) {
  const auto issues = validate_case(c);
  if (!issues.empty()) throw StructureError(issues.front());
}

}  // namespace gridqcqp
