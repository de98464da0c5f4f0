#pragma once

#include <span>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::analysis {

/// Attaches base and the base-relative values; raw fields are left untouched.
Estimate normalize(const Estimate& estimate, double base);
std::vector<Estimate> normalize(std::span<const Estimate> estimates, double base);

}  // namespace netexp::analysis
