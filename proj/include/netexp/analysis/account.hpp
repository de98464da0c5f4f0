#pragma once

#include <span>

#include "netexp/analysis/hourly.hpp"
#include "netexp/core/types.hpp"

namespace netexp::analysis {

/// Difference of condition means over per-account means, with the
/// two-sample unequal-variance standard error. A condition with a single
/// account contributes no variance term. n_units counts account-condition groups.
Estimate account_level_analysis(std::span<const Observation> obs, Estimand estimand,
                                Metric metric);

/// Conditions taken from the records' treatment flags.
Estimate account_level_analysis(std::span<const SessionRecord> records, Metric metric,
                                Estimand estimand = {EstimandKind::ate, std::nullopt});

}  // namespace netexp::analysis
