#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::analysis {

/// A session outcome tagged with the analysis condition it plays in one contrast.
/// The condition is not always the session's treatment flag: spillover contrasts
/// compare two sets of control sessions.
struct Observation {
  double start_time = 0.0;
  double value = 0.0;
  int condition = 0;
  std::int64_t account_id = 0;
};

/// Condition taken from each record's treatment flag.
std::vector<Observation> observations(std::span<const SessionRecord> records, Metric metric);

/// Condition 1 for the first set, 0 for the second.
std::vector<Observation> observations(std::span<const SessionRecord* const> condition1,
                                      std::span<const SessionRecord* const> condition0,
                                      Metric metric);

struct PanelRow {
  std::int64_t t = 0;  // chronological hour
  int hour_of_day = 0;
  int condition = 0;
  double z = 0.0;  // mean outcome
  std::size_t n = 0;
};

/// Rows sorted by t, condition 0 before condition 1 within a t. Empty (t, A)
/// combinations are absent rather than zero-filled.
struct HourlyPanel {
  std::vector<PanelRow> rows;

  std::size_t sessions() const;
  bool has_condition(int condition) const;
  std::size_t distinct_hours() const;
};

HourlyPanel hourly_aggregate(std::span<const Observation> obs);
HourlyPanel hourly_aggregate(std::span<const SessionRecord> records, Metric metric);

}  // namespace netexp::analysis
