#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netexp/causal/sutva.hpp"
#include "netexp/sim/scenario.hpp"

namespace netexp::io {

/// Identifies the config and seed behind every table written.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string line() const;
};

Provenance provenance_of(const sim::ScenarioConfig& config, std::uint64_t seed);

// --- simulate ---------------------------------------------------------------

struct SimulateOutput {
  Provenance provenance;
  sim::SimulationResult result;
  std::map<std::string, std::size_t> sessions_per_cell;
  std::vector<std::string> plan_warnings;
};

/// Runs the scenario; writes the log to `out` when non-empty, plus a
/// `<out>.meta.json` sidecar with the config hash and seed.
SimulateOutput cmd_simulate(const sim::ScenarioConfig& config, std::uint64_t seed,
                            const std::filesystem::path& out = {});
void print_summary(std::ostream& os, const SimulateOutput& output);

// --- analyze ----------------------------------------------------------------

struct HourlySeriesRow {
  int link_id = 1;
  std::int64_t hour_index = 0;
  int treatment = 0;
  std::size_t sessions = 0;
  MetricValues mean;
};

struct ReportBundle {
  Provenance provenance;
  std::vector<Estimate> estimates;
  std::vector<HourlySeriesRow> hourly;
  std::vector<std::string> notes;  // disabled estimands and plan warnings
};

/// Estimates every estimand the config's design identifies, normalized by
/// its normalization cell, plus the per-hour series by link and arm.
ReportBundle cmd_analyze(const SessionLog& log, const sim::ScenarioConfig& config,
                         std::uint64_t seed);

std::vector<HourlySeriesRow> hourly_series(const SessionLog& log);

void write_hourly_series(std::ostream& os, const std::vector<HourlySeriesRow>& rows,
                         const Provenance& provenance);

// --- sweep ------------------------------------------------------------------

struct SweepRow {
  double p = 0.0;
  int treatment = 0;
  std::size_t sessions = 0;
  MetricValues mean;
};

struct SweepReport {
  Provenance provenance;
  std::vector<SweepRow> rows;          // cell means by allocation and arm
  std::vector<Estimate> estimates;     // tau, spillover, partial per p; tte
  std::vector<causal::SutvaReport> diagnostics;  // one per metric

  std::optional<SweepRow> row(double p, int treatment) const;
};

/// One A/B run per allocation plus pure p=0 and p=1 runs, all at the same
/// seed. Runs fan out over worker threads and merge by index.
SweepReport cmd_sweep(const sim::ScenarioConfig& config, std::vector<double> allocations,
                      std::uint64_t seed);

void write_sweep_table(std::ostream& os, const SweepReport& report);
void write_diagnostics(std::ostream& os, const SweepReport& report);

// --- replicate --------------------------------------------------------------

struct ReplicateRow {
  Estimand estimand;
  Metric metric = Metric::avg_throughput;
  Aggregation aggregation = Aggregation::hourly;
  int replications = 0;
  double mean = 0.0;
  double sd = 0.0;
  double mc_se = 0.0;
  double truth = 0.0;  // 0 for an inert treatment, else the pooled cell-mean difference
  double bias_z = 0.0;
  double coverage = 0.0;
  double positive_fraction = 0.0;
  double mean_ci_width = 0.0;
};

struct ReplicateReport {
  Provenance provenance;
  std::vector<ReplicateRow> rows;
  const ReplicateRow* find(const Estimand& e, Metric m) const;
};

ReplicateReport cmd_replicate(const sim::ScenarioConfig& config, int replications,
                              std::uint64_t seed);
void write_replicate(std::ostream& os, const ReplicateReport& report);

// --- calibrate --------------------------------------------------------------

struct CalibrationCandidate {
  std::string name;
  designs::DesignConfig design;
};

struct CalibrationRow {
  std::string design;
  Estimate estimate;
  double z = 0.0;
  double p_value = 1.0;
  bool false_positive = false;             // raw, at alpha
  bool false_positive_bonferroni = false;  // alpha / metrics tested
};

struct CalibrationVerdict {
  std::string design;
  bool flagged = false;  // any Bonferroni-corrected false positive
  int raw_false_positives = 0;
  std::vector<std::string> warnings;
};

struct CalibrationReport {
  Provenance provenance;
  double alpha = 0.05;
  std::vector<CalibrationRow> rows;
  std::vector<CalibrationVerdict> verdicts;
  const CalibrationVerdict* verdict(const std::string& design) const;
};

/// A/A runs: the baseline scenario with every link held at control, analysed
/// with each candidate's TTE contrast. The baseline treatment must be inert.
CalibrationReport cmd_calibrate(const sim::ScenarioConfig& baseline,
                                const std::vector<CalibrationCandidate>& candidates,
                                std::uint64_t seed, double alpha = 0.05);
void write_calibration(std::ostream& os, const CalibrationReport& report);

/// Runs f(i) for i in [0, n) across worker threads; results land by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace netexp::io
