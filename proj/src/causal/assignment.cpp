#include "netexp/causal/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "netexp/core/error.hpp"
#include "netexp/core/hash.hpp"

namespace netexp::causal {
namespace {

void check_inputs(std::span<const std::int64_t> unit_ids, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::invalid_allocation, "allocation p=" + std::to_string(p) + " outside [0,1]");
  }
  if (unit_ids.empty()) fail(ErrorCode::invalid_allocation, "no units to assign");
  std::unordered_set<std::int64_t> seen(unit_ids.begin(), unit_ids.end());
  if (seen.size() != unit_ids.size()) fail(ErrorCode::invalid_allocation, "duplicate unit ids");
}

}  // namespace

std::size_t AssignmentVector::treated_count() const {
  return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), 1));
}

double AssignmentVector::treated_fraction() const {
  return assignments.empty() ? 0.0
                             : static_cast<double>(treated_count()) /
                                   static_cast<double>(assignments.size());
}

bool bernoulli_draw(std::int64_t unit_id, double p, std::uint64_t seed) {
  return stable_uniform(seed, static_cast<std::uint64_t>(unit_id), HashStream::assignment) < p;
}

AssignmentVector assign_bernoulli(std::span<const std::int64_t> unit_ids, double p,
                                  std::uint64_t seed) {
  check_inputs(unit_ids, p);
  AssignmentVector out{{unit_ids.begin(), unit_ids.end()}, {}, p, seed};
  out.assignments.reserve(unit_ids.size());
  for (auto id : unit_ids) out.assignments.push_back(bernoulli_draw(id, p, seed) ? 1 : 0);
  return out;
}

std::size_t complete_treated_count(std::size_t n, double p) {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
}

AssignmentVector assign_complete(std::span<const std::int64_t> unit_ids, double p,
                                 std::uint64_t seed) {
  check_inputs(unit_ids, p);
  std::vector<std::size_t> order(unit_ids.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    return std::pair{stable_hash(seed, static_cast<std::uint64_t>(unit_ids[i])), unit_ids[i]};
  };
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return key(a) < key(b); });
  AssignmentVector out{{unit_ids.begin(), unit_ids.end()}, std::vector<std::uint8_t>(unit_ids.size(), 0), p, seed};
  const auto k = complete_treated_count(unit_ids.size(), p);
  for (std::size_t r = 0; r < k; ++r) out.assignments[order[r]] = 1;
  return out;
}

}  // namespace netexp::causal
