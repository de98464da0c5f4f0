#pragma once

#include <span>

#include "netexp/analysis/hourly.hpp"
#include "netexp/core/types.hpp"

namespace netexp::analysis {

inline constexpr int kDefaultHacLag = 2;

/// Hourly aggregation, hour-of-day fixed-effects OLS and Newey-West errors.
/// The point is the treatment coefficient; n_units counts sessions.
Estimate hourly_fixed_effects_analysis(std::span<const Observation> obs, Estimand estimand,
                                       Metric metric, int lag = kDefaultHacLag);

}  // namespace netexp::analysis
