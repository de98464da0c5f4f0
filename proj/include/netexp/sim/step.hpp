#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "netexp/sim/specs.hpp"

namespace netexp::sim {

/// Aggregate flow attributes that drive the congested loss rate.
struct LossMix {
  double mean_weight = 1.0;
  double unpaced_fraction = 1.0;  // share of bytes sent unpaced
  bool pacing_model = false;
};

/// base_loss below the congestion threshold; at or above it, base_loss scaled by the link's
/// congestion multiplier and by mean_weight^gamma (times the pacing factor
/// when the pacing model is active). Always < 1.
double loss_rate(double utilization, const LossMix& mix, const CompetitionModel& model,
                 const LinkSpec& link);

/// Highest ladder rung at or below ladder_fraction * estimate, clamped to the
/// cap, never below the lowest rung.
double choose_bitrate(double estimated_throughput_bps, const WorkloadSpec& workload,
                      std::optional<double> cap_bps = std::nullopt);

/// Advantage weight r(f) = 1 + kappa * (1 - f) of a flow whose algorithm
/// carries fraction f of the link's flows. f outside (0, 1) takes the limit
/// values r(0+) and r(1-).
double asymmetric_cc_weight(double own_fraction, double kappa);

struct StepContext {
  double dt_s = 60.0;
  CompetitionModel model;
  bool pacing_model = false;
  std::uint64_t seed = 0;  // queue-drain sampling
};

/// Advance one link by one step. Flows must carry their demand and weight
/// for the step. Allocations come from weighted_share; the queue sits at the
/// standing delay while offered load is at or above capacity.
void advance_step(LinkState& link, std::span<FlowState> flows, const StepContext& ctx);

}  // namespace netexp::sim
