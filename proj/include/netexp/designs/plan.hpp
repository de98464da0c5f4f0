#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::designs {

enum class DesignKind { ab, paired_link, switchback, event_study, gradual, aa };
enum class AssignmentMode { bernoulli, complete };
enum class IntervalLabeling { coin, alternating };
// Where a time-based design gets its data: its own run, or the two links of
// a paired-link run (treated link 1 stands in for treatment periods, control
// link 2 for control periods).
enum class DesignSource { direct, paired_link };

std::string_view to_string(DesignKind k);
std::string_view to_string(AssignmentMode m);
std::string_view to_string(IntervalLabeling l);
std::string_view to_string(DesignSource s);

struct Phase {
  double start_time_s = 0.0;
  double p = 0.0;
  bool operator==(const Phase&) const = default;
};

/// Design parameters as stored in a scenario config.
struct DesignConfig {
  DesignKind kind = DesignKind::ab;
  double p = 0.5;  // ab
  AssignmentMode assignment = AssignmentMode::bernoulli;
  double p_high = 0.95;  // paired_link, and paired-link sourced designs
  double p_low = 0.05;
  double interval_length_s = 86400.0;  // switchback
  double within_alloc = 0.95;
  IntervalLabeling labeling = IntervalLabeling::coin;
  double burn_in_s = 0.0;
  std::optional<double> change_time_s;  // event_study
  double pre_alloc = 0.05;
  double post_alloc = 0.95;
  std::vector<Phase> schedule;  // gradual
  DesignSource source = DesignSource::direct;
  std::optional<std::uint64_t> seed;  // assignment seed; scenario seed when absent

  bool operator==(const DesignConfig&) const = default;
};

struct AllocationSegment {
  int link_id = 1;
  double start_s = 0.0;
  double end_s = 0.0;
  double p = 0.0;
  std::string label;  // "" for single-segment links, "i3", "pre", "ph2", ...
};

/// Allocation probability for every (link, time); segments of each link
/// partition [0, horizon).
struct DesignPlan {
  DesignKind kind = DesignKind::ab;
  DesignSource source = DesignSource::direct;
  double horizon_s = 0.0;
  std::vector<int> links;
  std::vector<AllocationSegment> segments;
  AssignmentMode assignment = AssignmentMode::bernoulli;
  std::uint64_t assignment_seed = 0;

  // switchback
  double interval_length_s = 0.0;
  std::vector<bool> interval_treated;
  int label_redraws = 0;
  double burn_in_s = 0.0;
  double within_alloc = 0.0;
  // event study
  std::optional<double> change_time_s;
  double pre_alloc = 0.0;
  double post_alloc = 0.0;
  // gradual
  std::vector<Phase> schedule;
  // paired_link (also the data source of emulated designs)
  double p_high = 0.0;
  double p_low = 0.0;

  std::vector<std::string> warnings;

  bool has_link(int link_id) const;
  const AllocationSegment& segment(int link_id, double t) const;
  double allocation(int link_id, double t) const;
  std::string cell_label(int link_id, double t, bool treated) const;
  /// Every cell label the plan can produce.
  std::vector<std::string> cells() const;
  /// Throws invalid-design when segments leave gaps or overlap, or p is outside [0,1].
  void validate() const;
};

struct TimeWindow {
  double start_s = 0.0;
  double end_s = 0.0;
  bool contains(double t) const { return start_s <= t && t < end_s; }
};

/// Selects sessions by link, treatment arm and start-time windows; absent
/// fields match everything.
struct CellPredicate {
  std::optional<int> link_id;
  std::optional<int> treatment;
  std::vector<TimeWindow> windows;

  bool matches(const SessionRecord& r) const;
  bool disjoint_from(const CellPredicate& other) const;
  std::string describe() const;
};

struct EstimandSpec {
  Estimand estimand;
  CellPredicate numerator;    // analysis condition 1
  CellPredicate denominator;  // analysis condition 0
  Aggregation analysis = Aggregation::hourly;
};

struct CellMap {
  std::vector<EstimandSpec> entries;
  std::optional<CellPredicate> normalization_cell;
  std::vector<std::string> disabled;  // estimands the plan cannot identify, with reasons
};

struct PlannedDesign {
  DesignPlan plan;
  CellMap cells;
};

/// Horizon and links a plan is laid over.
struct PlanFrame {
  double horizon_s = 86400.0;
  std::vector<int> links{1};
  std::uint64_t seed = 0;
  std::vector<double> daily_demand_multipliers;  // for the event-study seasonality warning
};

PlannedDesign plan_ab(double p, const PlanFrame& frame,
                      AssignmentMode mode = AssignmentMode::bernoulli);
PlannedDesign plan_paired_link(double p_high, double p_low, const PlanFrame& frame);
PlannedDesign plan_switchback(double interval_length_s, double within_alloc, const PlanFrame& frame,
                              IntervalLabeling labeling = IntervalLabeling::coin,
                              double burn_in_s = 0.0,
                              DesignSource source = DesignSource::direct,
                              double p_high = 0.95, double p_low = 0.05);
PlannedDesign plan_event_study(double change_time_s, double pre_alloc, double post_alloc,
                               const PlanFrame& frame,
                               DesignSource source = DesignSource::direct,
                               double p_high = 0.95, double p_low = 0.05);
PlannedDesign plan_gradual(std::span<const Phase> schedule, const PlanFrame& frame,
                           AssignmentMode mode = AssignmentMode::bernoulli);
PlannedDesign plan_aa(const PlanFrame& frame);

/// Dispatches on config.kind. The assignment seed is config.seed or frame.seed.
PlannedDesign build_design(const DesignConfig& config, const PlanFrame& frame);

/// The same comparisons with every treatment-arm condition dropped, for
/// running a design's contrasts on an all-control baseline log.
CellMap as_aa(const CellMap& cells);

/// Sessions whose lifetime crosses the boundary of the interval they started in.
std::vector<std::int64_t> carryover_sessions(std::span<const SessionRecord> log,
                                             const DesignPlan& plan, double session_duration_s);

/// Estimates for every (estimand, metric) in the cell map, each routed to the
/// hourly or account analysis and normalized by the mean of the plan's
/// normalization cell when that mean is positive.
std::vector<Estimate> estimate_all(std::span<const SessionRecord> log, const CellMap& cells,
                                   std::span<const Metric> metrics);

}  // namespace netexp::designs
