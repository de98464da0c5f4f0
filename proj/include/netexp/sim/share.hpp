#pragma once

#include <span>
#include <vector>

namespace netexp::sim {

/// Weighted max-min (water-filling) allocation of capacity among flows with
/// the given demands (kUnbounded allowed). Demand-limited flows get their
/// demand; the rest split what remains in proportion to weight.
std::vector<double> weighted_share(std::span<const double> demands,
                                   std::span<const double> weights, double capacity);

/// For each flow, the rate it would receive if it alone became backlogged
/// while every other flow kept its demand. This is what a transfer measures
/// as its throughput; it equals the allocation for flows already backlogged.
std::vector<double> attainable_rates(std::span<const double> demands,
                                     std::span<const double> weights, double capacity);

}  // namespace netexp::sim
