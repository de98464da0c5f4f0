#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netexp/core/types.hpp"
#include "netexp/designs/plan.hpp"
#include "netexp/sim/specs.hpp"

namespace netexp::sim {

/// Everything needed to reproduce one experiment from a single file.
struct ScenarioConfig {
  std::string name;
  std::vector<LinkSpec> links{LinkSpec{}};
  WorkloadSpec workload;
  CompetitionModel competition;
  TreatmentSpec treatment;
  designs::DesignConfig design;
  std::uint64_t seed = 1;
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  int replication_count = 1;
  double dt_s = 60.0;

  std::vector<int> link_ids() const;
  const LinkSpec& link(int link_id) const;
  designs::PlanFrame frame(std::uint64_t seed) const;
  /// Plan for this config's design at the given run seed.
  designs::PlannedDesign plan(std::uint64_t seed) const;
  /// Throws Error(config) describing the first broken invariant.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

struct HourTrace {
  std::int64_t hour_index = 0;
  int steps = 0;
  int congested_steps = 0;
  double mean_utilization = 0.0;  // capped at 10 for unbounded demand
  double mean_active_flows = 0.0;
  bool congested() const { return steps > 0 && 2 * congested_steps >= steps; }
};

struct LinkTrace {
  int link_id = 1;
  std::vector<HourTrace> hours;  // one per hour of the horizon
  int congested_steps = 0;
  int congested_hours() const;
};

struct SimulationResult {
  SessionLog log;
  std::vector<LinkTrace> links;
  std::int64_t steps = 0;
};

/// Runs every link of the scenario under the plan. Identical (config, plan,
/// seed) give identical logs. Throws Error(empty_log) when no session arrives.
SimulationResult run_scenario(const ScenarioConfig& config, const designs::DesignPlan& plan,
                              std::uint64_t seed);

/// Plan built from config.design at the given seed, then run.
SimulationResult run_scenario(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace netexp::sim
