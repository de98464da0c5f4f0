#include "netexp/sim/share.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "netexp/core/error.hpp"

namespace netexp::sim {
namespace {

void check(std::span<const double> demands, std::span<const double> weights, double capacity) {
  if (demands.size() != weights.size()) {
    fail(ErrorCode::model, "weighted_share: demands and weights differ in length");
  }
  if (!(capacity > 0.0)) fail(ErrorCode::model, "weighted_share: capacity must be positive");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      fail(ErrorCode::model, "weighted_share: weight " + std::to_string(weights[i]) +
                                 " of flow " + std::to_string(i) + " is not positive");
    }
    if (!(demands[i] >= 0.0)) {
      fail(ErrorCode::model, "weighted_share: negative demand for flow " + std::to_string(i));
    }
  }
}

// Flows in the order they saturate as the water level rises.
std::vector<std::size_t> saturation_order(std::span<const double> demands,
                                          std::span<const double> weights) {
  std::vector<std::size_t> order(demands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return demands[a] / weights[a] < demands[b] / weights[b];
  });
  return order;
}

}  // namespace

std::vector<double> weighted_share(std::span<const double> demands,
                                   std::span<const double> weights, double capacity) {
  check(demands, weights, capacity);
  const auto order = saturation_order(demands, weights);
  std::vector<double> alloc(demands.size(), 0.0);
  double remaining = capacity;
  double weight_left = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::size_t k = 0;
  for (; k < order.size(); ++k) {
    const auto i = order[k];
    if (!(demands[i] <= weights[i] * (remaining / weight_left))) break;
    alloc[i] = demands[i];
    remaining -= demands[i];
    weight_left -= weights[i];
  }
  if (k < order.size()) {
    const double level = std::max(0.0, remaining) / weight_left;
    for (; k < order.size(); ++k) alloc[order[k]] = weights[order[k]] * level;
  }
  return alloc;
}

std::vector<double> attainable_rates(std::span<const double> demands,
                                     std::span<const double> weights, double capacity) {
  check(demands, weights, capacity);
  const auto order = saturation_order(demands, weights);
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> out(demands.size(), 0.0);
  for (std::size_t i = 0; i < demands.size(); ++i) {
    double remaining = capacity;
    double weight_left = total_weight;
    for (auto j : order) {
      if (j == i) continue;
      if (!(demands[j] <= weights[j] * (remaining / weight_left))) break;
      remaining -= demands[j];
      weight_left -= weights[j];
    }
    out[i] = weights[i] * (std::max(0.0, remaining) / weight_left);
  }
  return out;
}

}  // namespace netexp::sim
