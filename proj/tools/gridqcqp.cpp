// Batch front end: gridqcqp <verb> [options] case.m ...

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridqcqp/pipeline.hpp"

namespace {

using namespace gridqcqp;

struct Settings {
  std::string flow_mode = "none";
  std::string repr = "real";
  std::string out;
  std::string format = "text";
  double feastol = 5e-6, xtol = 1e-8, opttol = 1e-4, tol = 1e-8;
  int max_iter = 1000, pf_max_iter = 30;
  unsigned jobs = 1;
  bool all_modes = false;
  bool clamp_pmin = false;
};

/// Keys of the optional JSON config mirror the long flag names.
void load_config(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const auto j = nlohmann::json::parse(in);
  for (const auto& [key, value] : j.items()) {
    if (key == "flow-mode") s.flow_mode = value.get<std::string>();
    else if (key == "repr") s.repr = value.get<std::string>();
    else if (key == "out") s.out = value.get<std::string>();
    else if (key == "format") s.format = value.get<std::string>();
    else if (key == "feastol") s.feastol = value.get<double>();
    else if (key == "xtol") s.xtol = value.get<double>();
    else if (key == "opttol") s.opttol = value.get<double>();
    else if (key == "tol") s.tol = value.get<double>();
    else if (key == "max-iter") s.max_iter = value.get<int>();
    else if (key == "pf-max-iter") s.pf_max_iter = value.get<int>();
    else if (key == "jobs") s.jobs = value.get<unsigned>();
    else if (key == "all-modes") s.all_modes = value.get<bool>();
    else if (key == "clamp-pmin") s.clamp_pmin = value.get<bool>();
    else throw std::runtime_error("unknown config key '" + key + "'");
  }
}

Stages stages_for(const std::string& verb, bool all_modes) {
  Stages st;
  if (verb == "bounds" || verb == "all") st.bounds = true;
  if (verb == "qcqp" || verb == "all") st.qcqp = true;
  if (verb == "sdpa" || verb == "all") st.sdpa = true;
  if (verb == "profiles" || verb == "all") st.profiles = true;
  st.all_flow_modes = all_modes || verb == "all";
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MATPOWER case statistics, AC-OPF bounds and QCQP export"};
  app.require_subcommand(1);

  Settings flags;
  std::string config;
  std::vector<std::string> cases;
  std::vector<CLI::Option*> set_by_flag;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("cases", cases, "MATPOWER case files")->check(CLI::ExistingFile);
    sub->add_option("--config", config, "JSON file with default settings")
        ->check(CLI::ExistingFile);
    set_by_flag = {
        sub->add_option("--flow-mode", flags.flow_mode, "S, I or none")
            ->check(CLI::IsMember({"S", "I", "none"})),
        sub->add_option("--repr", flags.repr, "complex or real")
            ->check(CLI::IsMember({"complex", "real"})),
        sub->add_option("--out", flags.out, "output directory"),
        sub->add_option("--format", flags.format, "stdout tables: text, csv or json")
            ->check(CLI::IsMember({"text", "csv", "json"})),
        sub->add_option("--feastol", flags.feastol),
        sub->add_option("--xtol", flags.xtol),
        sub->add_option("--opttol", flags.opttol),
        sub->add_option("--tol", flags.tol, "power flow mismatch tolerance, pu"),
        sub->add_option("--max-iter", flags.max_iter, "OPF iteration limit"),
        sub->add_option("--pf-max-iter", flags.pf_max_iter),
        sub->add_option("--jobs", flags.jobs)->check(CLI::PositiveNumber),
        sub->add_flag("--all-modes", flags.all_modes, "solve the OPF under S, I and none"),
        sub->add_flag("--clamp-pmin", flags.clamp_pmin, "raise negative Pmin to zero"),
    };
  };
  std::vector<CLI::App*> verbs;
  for (const auto* name : {"stats", "bounds", "qcqp", "sdpa", "profiles", "all"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    verbs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  // Config values first, then whatever was given on the command line.
  Settings s;
  try {
    if (!config.empty()) load_config(config, s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const auto given = [&](const char* name) {
    for (auto* v : verbs)
      if (v->parsed()) return v->get_option(name)->count() > 0;
    return false;
  };
  if (given("--flow-mode")) s.flow_mode = flags.flow_mode;
  if (given("--repr")) s.repr = flags.repr;
  if (given("--out")) s.out = flags.out;
  if (given("--format")) s.format = flags.format;
  if (given("--feastol")) s.feastol = flags.feastol;
  if (given("--xtol")) s.xtol = flags.xtol;
  if (given("--opttol")) s.opttol = flags.opttol;
  if (given("--tol")) s.tol = flags.tol;
  if (given("--max-iter")) s.max_iter = flags.max_iter;
  if (given("--pf-max-iter")) s.pf_max_iter = flags.pf_max_iter;
  if (given("--jobs")) s.jobs = flags.jobs;
  if (given("--all-modes")) s.all_modes = flags.all_modes;
  if (given("--clamp-pmin")) s.clamp_pmin = flags.clamp_pmin;

  std::string verb;
  for (auto* v : verbs)
    if (v->parsed()) verb = v->get_name();

  PipelineConfig cfg;
  try {
    cfg.stages = stages_for(verb, s.all_modes);
    cfg.flow_mode = parse_flow_limit(s.flow_mode);
    cfg.repr = parse_representation(s.repr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  cfg.out_dir = s.out;
  cfg.jobs = s.jobs;
  cfg.clamp_pmin = s.clamp_pmin;
  cfg.pf.tol = s.tol;
  cfg.pf.max_iter = s.pf_max_iter;
  cfg.opf.ipm.feastol = s.feastol;
  cfg.opf.ipm.xtol = s.xtol;
  cfg.opf.ipm.opttol = s.opttol;
  cfg.opf.ipm.max_iter = s.max_iter;
  if ((verb == "qcqp" || verb == "sdpa" || verb == "profiles") && s.out.empty())
    std::cerr << "note: no --out given, only the tables are printed\n";

  const auto result = run_pipeline(cases, cfg);
  const TableFormat format = s.format == "json"  ? TableFormat::json
                             : s.format == "csv" ? TableFormat::csv
                                                 : TableFormat::text;
  if (format == TableFormat::json)
    std::cout << render_json(result.ledgers, result.failures);
  else
    std::cout << render_tables(result.ledgers, format);
  for (const auto& f : result.failures)
    std::cerr << "error: " << f.source << ": " << f.message << '\n';
  if (!result.failures.empty())
    std::cerr << result.failures.size() << " of " << cases.size()
              << " cases failed\n";
  return result.exit_status();
}
