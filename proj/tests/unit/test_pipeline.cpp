#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridqcqp/numeric_text.hpp"
#include "gridqcqp/pipeline.hpp"
#include "support.hpp"

using namespace gridqcqp;
namespace fs = std::filesystem;
namespace ts = test_support;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gridqcqp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_bad_case(const fs::path& dir) {
  const auto path = dir / "broken.m";
  std::ofstream(path) << "function mpc = broken\nmpc.version = '2';\nmpc.baseMVA = 100;\n"
                         "mpc.bus = [\n\t1\t3\t0;\n];\n";
  return path.string();
}

/// RFC 4180 reader for the round-trip check.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      rows.back().push_back(cell);
      cell.clear();
    } else if (ch == '\n') {
      rows.back().push_back(cell);
      cell.clear();
      rows.emplace_back();
    } else {
      cell += ch;
    }
  }
  rows.pop_back();
  return rows;
}

}  // namespace

TEST_CASE("empty batch") {
  const auto res = run_pipeline({}, PipelineConfig{});
  CHECK(res.ledgers.empty());
  CHECK(res.failures.empty());
  CHECK(res.exit_status() == 0);
  CHECK(render_tables(res.ledgers, TableFormat::text).empty());
}

TEST_CASE("a failing case does not stop the batch") {
  const auto dir = scratch_dir("batch");
  PipelineConfig cfg;
  cfg.stages.bounds = true;
  cfg.stages.qcqp = true;
  cfg.out_dir = (dir / "out").string();
  const std::vector<std::string> paths{ts::case_path("case89pegase").string(),
                                       write_bad_case(dir),
                                       ts::case_path("case1354pegase").string()};
  const auto res = run_pipeline(paths, cfg);
  REQUIRE(res.ledgers.size() == 2);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.exit_status() == 1);
  CHECK(res.ledgers[0].case_name == "case89pegase");
  CHECK(res.ledgers[1].case_name == "case1354pegase");
  CHECK(res.failures[0].source == paths[1]);
  CHECK_FALSE(res.failures[0].message.empty());

  const auto& l89 = res.ledgers[0];
  REQUIRE(l89.dcopf_lb);
  CHECK(std::abs(*l89.dcopf_lb - 5733.37) <= 0.01);
  REQUIRE(l89.acopf[static_cast<std::size_t>(FlowLimit::none)]);
  CHECK(l89.gap_state == GapState::value);
  CHECK(format_fixed(l89.gap_percent, 2) == "1.47");
  CHECK(res.ledgers[1].qcqp->n_var == 2708);

  for (const auto* f : {"general.csv", "losses.csv", "qcqp_sizes.csv", "tables.txt",
                        "ledger.json", "case89pegase.qcqp", "case1354pegase.qcqp"})
    CHECK(fs::exists(dir / "out" / f));
  std::ifstream in(dir / "out" / "ledger.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["cases"].size() == 2);
  CHECK(j["errors"].size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("results do not depend on the worker count") {
  PipelineConfig cfg;
  cfg.stages.qcqp = true;
  std::vector<std::string> paths;
  for (const auto* name : {"case89pegase", "case1354pegase", "case2869pegase", "case89pegase"})
    paths.push_back(ts::case_path(name).string());
  cfg.jobs = 1;
  const auto one = run_pipeline(paths, cfg);
  cfg.jobs = 3;
  const auto three = run_pipeline(paths, cfg);
  CHECK(render_json(one.ledgers) == render_json(three.ledgers));
  CHECK(render_tables(one.ledgers, TableFormat::text) ==
        render_tables(three.ledgers, TableFormat::text));
}

TEST_CASE("invalid bound renders as not valid") {
  BoundLedger l;
  l.case_name = "flagged";
  l.dcopf_lb = 312411.0;
  l.lb_valid = false;
  l.acopf[static_cast<std::size_t>(FlowLimit::none)] = 315888.5;
  l.gap_state = GapState::not_valid;
  const auto tables = build_tables({l});
  const auto it = std::find_if(tables.begin(), tables.end(),
                               [](const ReportTable& t) { return t.name == "losses"; });
  REQUIRE(it != tables.end());
  CHECK(it->rows.at(0) == std::vector<std::string>{"flagged", "312411.0", "315888.5", "not valid"});
  const auto j = nlohmann::json::parse(render_json({l}));
  CHECK(j["cases"][0]["gap_percent"] == "not valid");
  CHECK(j["cases"][0]["lb_valid"] == false);
}

TEST_CASE("flow-limit table only when limits were solved") {
  BoundLedger l;
  l.case_name = "c";
  l.acopf[static_cast<std::size_t>(FlowLimit::none)] = 1.0;
  auto names = [](const std::vector<ReportTable>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.name);
    return out;
  };
  CHECK(names(build_tables({l})) ==
        std::vector<std::string>{"general", "voltage_levels", "negative_rx", "losses"});
  l.acopf[static_cast<std::size_t>(FlowLimit::current)] = 1.0;
  CHECK(names(build_tables({l})).back() == "flow_limits");
}

TEST_CASE("CSV round trip") {
  const ReportTable t{"t", "T", {"case", "note"}, {{"a", "plain"}, {"b", "x, \"y\"\nz"}}};
  const auto rows = parse_csv(render_csv(t));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == t.header);
  CHECK(rows[1] == t.rows[0]);
  CHECK(rows[2] == t.rows[1]);
}

TEST_CASE("text table layout") {
  const ReportTable t{"t", "Title", {"case", "n"}, {{"long_name", "1"}, {"x", "12345"}}};
  CHECK(render_text(t) ==
        "Title\n"
        "case           n\n"
        "----------------\n"
        "long_name      1\n"
        "x          12345\n");
}

TEST_CASE("flow mode names") {
  for (const auto m : {FlowLimit::apparent_power, FlowLimit::current, FlowLimit::none})
    CHECK(parse_flow_limit(to_string(m)) == m);
  CHECK(to_string(FlowLimit::apparent_power) == "S");
  CHECK_THROWS(parse_flow_limit("Z"));
}
