#pragma once

#include <functional>
#include <span>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::causal {

using RecordFilter = std::function<bool(const SessionRecord&)>;
using RecordRefs = std::vector<const SessionRecord*>;

RecordRefs refs(std::span<const SessionRecord> records);

namespace filters {
inline bool all(const SessionRecord&) { return true; }
inline bool treated(const SessionRecord& r) { return r.treatment == 1; }
inline bool control(const SessionRecord& r) { return r.treatment == 0; }
}  // namespace filters

/// Mean of the metric over records passing the filter; an empty group is an
/// error, never NaN.
double group_mean(std::span<const SessionRecord> records, Metric metric,
                  const RecordFilter& filter = filters::all);
double group_mean(std::span<const SessionRecord* const> records, Metric metric);

/// Within-cell difference in means, treated minus control, with
/// account-level standard errors. p is the allocation the cell ran at.
Estimate naive_ate(std::span<const SessionRecord> records, Metric metric, double p);
Estimate naive_ate(std::span<const SessionRecord* const> records, Metric metric, double p);

/// mu_T(1) - mu_C(0) from a (near-)fully treated and a (near-)fully control
/// cell, hourly fixed-effects analysis.
Estimate tte_estimate(std::span<const SessionRecord* const> treated,
                      std::span<const SessionRecord* const> control, Metric metric);
Estimate tte_estimate(std::span<const SessionRecord> treated,
                      std::span<const SessionRecord> control, Metric metric);

/// mu_C(p) - mu_C(0). Only defined for p < 1.
Estimate spillover_estimate(std::span<const SessionRecord* const> control_at_p,
                            std::span<const SessionRecord* const> control_at_0, Metric metric,
                            double p);
Estimate spillover_estimate(std::span<const SessionRecord> control_at_p,
                            std::span<const SessionRecord> control_at_0, Metric metric, double p);

/// mu_T(p) - mu_C(0).
Estimate partial_effect(std::span<const SessionRecord* const> treated_at_p,
                        std::span<const SessionRecord* const> control_at_0, Metric metric,
                        double p);
Estimate partial_effect(std::span<const SessionRecord> treated_at_p,
                        std::span<const SessionRecord> control_at_0, Metric metric, double p);

}  // namespace netexp::causal
