#include "netexp/analysis/normalize.hpp"

#include <cmath>
#include <string>

#include "netexp/core/error.hpp"

namespace netexp::analysis {

Estimate normalize(const Estimate& estimate, double base) {
  if (!(base > 0.0) || !std::isfinite(base)) {
    fail(ErrorCode::normalization, "normalization base must be positive, got " + std::to_string(base));
  }
  Estimate out = estimate;
  out.normalization_base = base;
  out.normalized = ScaledValues{estimate.point / base, estimate.std_error / base,
                                estimate.ci95_lo / base, estimate.ci95_hi / base};
  return out;
}

std::vector<Estimate> normalize(std::span<const Estimate> estimates, double base) {
  std::vector<Estimate> out;
  out.reserve(estimates.size());
  for (const auto& e : estimates) out.push_back(normalize(e, base));
  return out;
}

}  // namespace netexp::analysis
