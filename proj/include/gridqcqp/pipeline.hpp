#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gridqcqp/acopf.hpp"
#include "gridqcqp/powerflow.hpp"
#include "gridqcqp/qcqp.hpp"
#include "gridqcqp/stats.hpp"

namespace gridqcqp {

std::string to_string(FlowLimit mode);    // "S" | "I" | "none"
FlowLimit parse_flow_limit(std::string_view s);

/// Stages run for each case.
struct Stages {
  bool stats = true;
  bool bounds = false;
  bool all_flow_modes = false;  // solve the OPF under S, I and none
  bool qcqp = false;            // size table, plus the export file with an output dir
  bool sdpa = false;
  bool profiles = false;
};

struct PipelineConfig {
  Stages stages;
  FlowLimit flow_mode = FlowLimit::none;  // mode of the upper bound in the gap
  Representation repr = Representation::real_symmetric;
  PowerFlowOptions pf;
  AcopfOptions opf;
  std::string out_dir;  // empty: nothing written
  unsigned jobs = 1;
  bool clamp_pmin = false;  // apply clamp_negative_pmin after loading
};

enum class GapState { absent, not_valid, value };

/// One row of results for one case.
struct BoundLedger {
  std::string case_name;
  std::string source;
  CaseStats stats;
  double total_load_mw = 0.0;

  std::optional<double> dcopf_lb;
  bool lb_valid = true;
  std::string lb_reason;

  std::optional<double> pf_objective;
  bool pf_converged = false;
  /// Local OPF objective per flow mode, indexed by FlowLimit.
  std::array<std::optional<double>, 3> acopf;
  std::array<std::string, 3> acopf_status;

  FlowLimit gap_mode = FlowLimit::none;  // OPF mode used as upper bound
  GapState gap_state = GapState::absent;
  double gap_percent = 0.0;

  std::optional<QcqpSize> qcqp;
  std::vector<std::string> notes;
};

struct CaseFailure {
  std::string source;
  std::string message;
};

struct PipelineResult {
  std::vector<BoundLedger> ledgers;  // input order, failures left out
  std::vector<CaseFailure> failures;
  int exit_status() const { return failures.empty() ? 0 : 1; }
};

/// Runs the configured stages on one case. Throws on any error.
BoundLedger process_case(const std::string& path, const PipelineConfig& cfg);

/// Runs every case, `cfg.jobs` at a time. A failing case is recorded and does
/// not stop the others; results keep the input order. With an output dir the
/// per-case files and the merged tables are written there.
PipelineResult run_pipeline(const std::vector<std::string>& paths,
                            const PipelineConfig& cfg);

enum class TableFormat { text, csv, json };

/// A rendered table: header plus one row of cells per ledger.
struct ReportTable {
  std::string name;
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// General figures, voltage levels, negative R/X, losses minimization,
/// flow limits and QCQP sizes. Tables without data are left out.
std::vector<ReportTable> build_tables(const std::vector<BoundLedger>& ledgers);

std::string render_text(const ReportTable& t);
std::string render_csv(const ReportTable& t);
/// Ledgers and failures at full precision.
std::string render_json(const std::vector<BoundLedger>& ledgers,
                        const std::vector<CaseFailure>& failures = {});

std::string render_tables(const std::vector<BoundLedger>& ledgers,
                          TableFormat format);

}  // namespace gridqcqp
