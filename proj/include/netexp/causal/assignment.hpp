#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace netexp::causal {

struct AssignmentVector {
  std::vector<std::int64_t> unit_ids;
  std::vector<std::uint8_t> assignments;  // 1 = treatment
  double allocation_p = 0.0;
  std::uint64_t rng_seed = 0;

  std::size_t treated_count() const;
  double treated_fraction() const;
};

/// Bernoulli(p) draw for one unit. Depends only on (unit, p, seed), so
/// growing the unit set never reshuffles existing units, and for a fixed
/// seed a unit treated at p stays treated at any p' > p.
bool bernoulli_draw(std::int64_t unit_id, double p, std::uint64_t seed);

AssignmentVector assign_bernoulli(std::span<const std::int64_t> unit_ids, double p,
                                  std::uint64_t seed);

/// Complete randomization: exactly round(p * n) units treated, namely those
/// with the smallest hash draws. Used for small fixed populations where a
/// Bernoulli draw may leave one arm empty.
AssignmentVector assign_complete(std::span<const std::int64_t> unit_ids, double p,
                                 std::uint64_t seed);

/// Number treated under complete randomization of n units.
std::size_t complete_treated_count(std::size_t n, double p);

}  // namespace netexp::causal
