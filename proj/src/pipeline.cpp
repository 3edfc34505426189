#include "gridqcqp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "gridqcqp/dcopf_bound.hpp"
#include "gridqcqp/errors.hpp"
#include "gridqcqp/matpower_io.hpp"
#include "gridqcqp/numeric_text.hpp"

namespace gridqcqp {

namespace fs = std::filesystem;

std::string to_string(FlowLimit mode) {
  switch (mode) {
    case FlowLimit::apparent_power: return "S";
    case FlowLimit::current: return "I";
    case FlowLimit::none: return "none";
  }
  return "?";
}

FlowLimit parse_flow_limit(std::string_view s) {
  if (s == "S") return FlowLimit::apparent_power;
  if (s == "I") return FlowLimit::current;
  if (s == "none") return FlowLimit::none;
  throw std::invalid_argument("unknown flow mode '" + std::string(s) +
                              "' (expected S, I or none)");
}

namespace {

constexpr std::array<FlowLimit, 3> kModes = {
    FlowLimit::apparent_power, FlowLimit::current, FlowLimit::none};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::string mw(double v) { return format_fixed(v, 1); }

std::string count(std::size_t v) { return std::to_string(v); }

}  // namespace

BoundLedger process_case(const std::string& path, const PipelineConfig& cfg) {
  CaseData data = load_case_file(path);
  std::size_t clamped = 0;
  if (cfg.clamp_pmin) std::tie(data, clamped) = clamp_negative_pmin(data);
  require_valid_case(data);
  const Network net = build_network(data);

  BoundLedger led;
  led.case_name = data.name;
  led.source = path;
  led.stats = compute_stats(net, data);
  led.total_load_mw = led.stats.total_load_mw;
  for (const auto& w : net.warnings) led.notes.push_back(w);
  if (clamped > 0)
    led.notes.push_back("Pmin raised to 0 on " + std::to_string(clamped) +
                        " generators");

  const fs::path out = cfg.out_dir;
  const bool write = !cfg.out_dir.empty();
  if (write) fs::create_directories(out);

  if (cfg.stages.profiles && write) {
    const auto csv = emit_profiles(led.stats);
    write_file(out / (led.case_name + "_impedance.csv"), csv.impedance);
    write_file(out / (led.case_name + "_voltage.csv"), csv.voltage);
  }

  if (cfg.stages.bounds) {
    const AdmittanceModel adm = build_admittance(net);
    LowerBound lb;
    try {
      lb = dcopf_no_flow_limits(net, unit_costs(net));
      led.dcopf_lb = lb.value;
      led.lb_valid = lb.valid;
      led.lb_reason = lb.reason;
    } catch (const InfeasibleBoundError& e) {
      led.notes.push_back(std::string("DCOPF: ") + e.what());
    }

    const PfSolution pf = solve_powerflow(net, adm, cfg.pf);
    led.pf_converged = pf.converged;
    if (pf.converged)
      led.pf_objective = pf.objective_mw;
    else
      led.notes.push_back("power flow: " + pf.diagnostics);

    for (const auto mode : kModes) {
      if (!cfg.stages.all_flow_modes && mode != cfg.flow_mode) continue;
      const auto m = static_cast<std::size_t>(mode);
      const AcopfResult r = local_acopf(net, adm, pf, mode, cfg.opf);
      led.acopf_status[m] = r.point.diagnostics;
      if (!r.bound_crossings.empty()) {
        for (const auto& b : r.bound_crossings)
          led.notes.push_back("OPF " + to_string(mode) + ": " + b);
        continue;
      }
      const bool feasible = r.violations.empty() &&
                            r.point.max_mismatch <= cfg.opf.ipm.feastol;
      if (feasible)
        led.acopf[m] = r.point.objective_mw;
      else
        led.notes.push_back("OPF " + to_string(mode) + ": no feasible point (" +
                            r.point.diagnostics + ")");
    }

    led.gap_mode = cfg.flow_mode;
    const auto& ub = led.acopf[static_cast<std::size_t>(cfg.flow_mode)];
    if (led.dcopf_lb && ub) {
      const auto gap = gap_percent(lb, *ub);
      led.gap_state = gap ? GapState::value : GapState::not_valid;
      if (gap) led.gap_percent = *gap;
    }
  }

  if (cfg.stages.qcqp || cfg.stages.sdpa) {
    const QcqpProblem prob = build_qcqp(net, cfg.repr);
    led.qcqp = qcqp_size(prob);
    if (write && cfg.stages.qcqp)
      write_file(out / (led.case_name + ".qcqp"), export_qcqp(prob));
    if (write && cfg.stages.sdpa)
      write_file(out / (led.case_name + ".dat-s"),
                 export_shor_sdpa(embed_real(prob)));
  }
  return led;
}

PipelineResult run_pipeline(const std::vector<std::string>& paths,
                            const PipelineConfig& cfg) {
  struct Slot {
    std::optional<BoundLedger> ledger;
    std::optional<CaseFailure> failure;
  };
  std::vector<Slot> slots(paths.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      try {
        slots[i].ledger = process_case(paths[i], cfg);
      } catch (const std::exception& e) {
        slots[i].failure = CaseFailure{paths[i], e.what()};
      }
    }
  };
  const unsigned n_workers = std::max(
      1u, std::min(cfg.jobs, static_cast<unsigned>(paths.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  PipelineResult res;
  for (auto& s : slots) {
    if (s.ledger) res.ledgers.push_back(std::move(*s.ledger));
    if (s.failure) res.failures.push_back(std::move(*s.failure));
  }

  if (!cfg.out_dir.empty()) {
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);
    std::string text;
    for (const auto& t : build_tables(res.ledgers)) {
      write_file(out / (t.name + ".csv"), render_csv(t));
      text += render_text(t) + "\n";
    }
    write_file(out / "tables.txt", text);
    write_file(out / "ledger.json", render_json(res.ledgers, res.failures));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Tables

std::vector<ReportTable> build_tables(const std::vector<BoundLedger>& ledgers) {
  std::vector<ReportTable> tables;
  if (ledgers.empty()) return tables;

  ReportTable general{"general", "General figures",
                      {"case", "buses", "generators", "branches", "transformers"}, {}};
  ReportTable levels{"voltage_levels", "Number of nodes per voltage level",
                     {"case"}, {}};
  for (std::size_t k = 0; k < kVoltageClassCount; ++k)
    levels.header.push_back(voltage_class_label(static_cast<VoltageClass>(k)));
  ReportTable negative{"negative_rx", "Branches with negative R or X",
                       {"case", "R<0", "X<0"}, {}};
  ReportTable losses{"losses", "Losses minimization without flow constraints",
                     {"case", "DCOPF_MW", "OPF_MW", "gap"}, {}};
  ReportTable flows{"flow_limits", "OPF with flow limits S, I or none",
                    {"case", "S_MW", "I_MW", "none_MW"}, {}};
  ReportTable sizes{"qcqp_sizes", "QCQP sizes",
                    {"case", "nVAR", "nEQ", "nINEQ", "sparsity_percent"}, {}};

  const auto opt_mw = [](const std::optional<double>& v) {
    return v ? mw(*v) : std::string("-");
  };
  bool any_bounds = false, any_modes = false;
  for (const auto& l : ledgers) {
    const auto& s = l.stats;
    general.rows.push_back({l.case_name, count(s.n_bus), count(s.n_gen),
                            count(s.n_branch), count(s.n_transformer)});
    std::vector<std::string> row{l.case_name};
    for (const auto c : s.voltage_histogram) row.push_back(count(c));
    levels.rows.push_back(std::move(row));
    negative.rows.push_back({l.case_name, count(s.n_neg_r), count(s.n_neg_x)});

    if (l.dcopf_lb || l.pf_objective || std::any_of(l.acopf.begin(), l.acopf.end(),
                                                    [](const auto& v) { return v.has_value(); })) {
      any_bounds = true;
      std::string gap = "-";
      if (l.gap_state == GapState::not_valid) gap = "not valid";
      if (l.gap_state == GapState::value) gap = format_fixed(l.gap_percent, 2) + "%";
      const auto& ub = l.acopf[static_cast<std::size_t>(l.gap_mode)];
      losses.rows.push_back({l.case_name, opt_mw(l.dcopf_lb), opt_mw(ub), gap});
      std::vector<std::string> f{l.case_name};
      for (const auto mode : kModes) {
        const auto& v = l.acopf[static_cast<std::size_t>(mode)];
        any_modes = any_modes || (v && mode != FlowLimit::none);
        f.push_back(opt_mw(v));
      }
      flows.rows.push_back(std::move(f));
    }
    if (l.qcqp)
      sizes.rows.push_back({l.case_name, std::to_string(l.qcqp->n_var),
                            count(l.qcqp->n_eq), count(l.qcqp->n_ineq),
                            format_fixed(l.qcqp->sparsity_percent, 2)});
  }
  tables.push_back(std::move(general));
  tables.push_back(std::move(levels));
  tables.push_back(std::move(negative));
  if (any_bounds) tables.push_back(std::move(losses));
  if (any_modes) tables.push_back(std::move(flows));
  if (!sizes.rows.empty()) tables.push_back(std::move(sizes));
  return tables;
}

std::string render_text(const ReportTable& t) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto pad = std::string(width[c] - cells[c].size(), ' ');
      // First column left-aligned, numbers right-aligned.
      out << (c ? "  " : "") << (c ? pad + cells[c] : cells[c] + pad);
    }
    out << '\n';
  };
  out << t.title << '\n';
  line(t.header);
  std::size_t total = 0;
  for (const auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : t.rows) line(r);
  return out.str();
}

std::string render_csv(const ReportTable& t) {
  const auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << cell(cells[c]);
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out.str();
}

std::string render_json(const std::vector<BoundLedger>& ledgers,
                        const std::vector<CaseFailure>& failures) {
  using nlohmann::ordered_json;
  const auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json cases = ordered_json::array();
  for (const auto& l : ledgers) {
    const auto& s = l.stats;
    ordered_json j;
    j["case"] = l.case_name;
    j["source"] = l.source;
    j["stats"] = {{"buses", s.n_bus},
                  {"generators", s.n_gen},
                  {"branches", s.n_branch},
                  {"transformers", s.n_transformer},
                  {"voltage_levels", s.voltage_histogram},
                  {"negative_r", s.n_neg_r},
                  {"negative_x", s.n_neg_x},
                  {"in_service_buses", s.in_service_buses},
                  {"in_service_generators", s.in_service_gens},
                  {"in_service_branches", s.in_service_branches}};
    j["total_load_mw"] = l.total_load_mw;
    j["dcopf_lb_mw"] = opt(l.dcopf_lb);
    j["lb_valid"] = l.lb_valid;
    if (!l.lb_reason.empty()) j["lb_reason"] = l.lb_reason;
    j["pf_objective_mw"] = opt(l.pf_objective);
    ordered_json modes = ordered_json::object();
    for (const auto mode : kModes) {
      const auto m = static_cast<std::size_t>(mode);
      if (l.acopf_status[m].empty()) continue;
      modes[to_string(mode)] = {{"objective_mw", opt(l.acopf[m])},
                                {"status", l.acopf_status[m]}};
    }
    j["acopf"] = modes;
    j["gap_flow_mode"] = to_string(l.gap_mode);
    switch (l.gap_state) {
      case GapState::absent: j["gap_percent"] = nullptr; break;
      case GapState::not_valid: j["gap_percent"] = "not valid"; break;
      case GapState::value: j["gap_percent"] = l.gap_percent; break;
    }
    if (l.qcqp)
      j["qcqp"] = {{"n_var", l.qcqp->n_var},
                   {"n_eq", l.qcqp->n_eq},
                   {"n_ineq", l.qcqp->n_ineq},
                   {"sparsity_percent", l.qcqp->sparsity_percent}};
    else
      j["qcqp"] = nullptr;
    j["notes"] = l.notes;
    cases.push_back(std::move(j));
  }
  ordered_json errors = ordered_json::array();
  for (const auto& f : failures)
    errors.push_back({{"source", f.source}, {"error", f.message}});
  ordered_json root;
  root["cases"] = std::move(cases);
  root["errors"] = std::move(errors);
  return root.dump(2) + "\n";
}

std::string render_tables(const std::vector<BoundLedger>& ledgers,
                          TableFormat format) {
  if (format == TableFormat::json) return render_json(ledgers);
  std::string out;
  for (const auto& t : build_tables(ledgers)) {
    if (!out.empty()) out += '\n';
    if (format == TableFormat::csv) out += "# " + t.name + "\n" + render_csv(t);
    else out += render_text(t);
  }
  return out;
}

}  // namespace gridqcqp
