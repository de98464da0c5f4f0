#include "netexp/sim/step.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "netexp/core/error.hpp"
#include "netexp/core/hash.hpp"
#include "netexp/sim/share.hpp"

namespace netexp::sim {

double loss_rate(double utilization, const LossMix& mix, const CompetitionModel& model,
                 const LinkSpec& link) {
  if (utilization < link.congestion_threshold) return link.base_loss;
  double aggressiveness = std::pow(std::max(mix.mean_weight, 0.0), model.loss_exponent);
  if (mix.pacing_model) {
    const double f = std::clamp(mix.unpaced_fraction, 0.0, 1.0);
    aggressiveness *= model.pacing_loss_floor + (1.0 - model.pacing_loss_floor) * f;
  }
  const double rate = link.base_loss * link.congestion_loss_multiplier * aggressiveness;
  return std::min(rate, 0.999);
}

double choose_bitrate(double estimated_throughput_bps, const WorkloadSpec& workload,
                      std::optional<double> cap_bps) {
  const auto& ladder = workload.bitrate_ladder_bps;
  const double budget = workload.ladder_fraction * estimated_throughput_bps;
  double rung = ladder.front();
  for (double r : ladder) {
    if (r <= budget) rung = r;
  }
  if (cap_bps) rung = std::min(rung, *cap_bps);
  return std::max(rung, ladder.front());
}

double asymmetric_cc_weight(double own_fraction, double kappa) {
  const double f = std::clamp(own_fraction, 0.0, 1.0);
  return 1.0 + kappa * (1.0 - f);
}

void advance_step(LinkState& link, std::span<FlowState> flows, const StepContext& ctx) {
  if (!(ctx.dt_s > 0.0)) fail(ErrorCode::model, "advance_step: dt must be positive");
  const std::size_t n = flows.size();
  link.active_flows = n;

  std::vector<double> demands(n), weights(n);
  double offered = 0.0;
  double weight_sum = 0.0;
  bool any_unbounded = false;
  for (std::size_t i = 0; i < n; ++i) {
    demands[i] = flows[i].demand;
    weights[i] = std::min(flows[i].weight, ctx.model.max_weight);
    weight_sum += weights[i];
    if (std::isinf(demands[i])) any_unbounded = true;
    else offered += demands[i];
  }

  std::vector<double> alloc, attain;
  if (n > 0) {
    alloc = weighted_share(demands, weights, link.spec.capacity_bps);
    attain = attainable_rates(demands, weights, link.spec.capacity_bps);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(demands[i])) attain[i] = alloc[i];
    }
  }

  link.offered_bps = any_unbounded ? kUnbounded : offered;
  link.utilization = any_unbounded ? kUnbounded : offered / link.spec.capacity_bps;
  link.congested = n > 0 && link.utilization >= link.spec.congestion_threshold;
  link.queue_delay_s = link.congested ? link.spec.standing_queue_delay_s : 0.0;

  LossMix mix;
  mix.pacing_model = ctx.pacing_model;
  mix.mean_weight = n > 0 ? weight_sum / static_cast<double>(n) : 1.0;
  double total_alloc = 0.0, unpaced_alloc = 0.0;
  std::size_t unpaced_flows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_alloc += alloc[i];
    if (flows[i].unpaced) {
      unpaced_alloc += alloc[i];
      ++unpaced_flows;
    }
  }
  mix.unpaced_fraction = total_alloc > 0.0
                             ? unpaced_alloc / total_alloc
                             : (n > 0 ? static_cast<double>(unpaced_flows) / static_cast<double>(n) : 1.0);
  link.loss_rate = loss_rate(link.utilization, mix, ctx.model, link.spec);
  link.allocated_bps = total_alloc;

  for (std::size_t i = 0; i < n; ++i) {
    auto& f = flows[i];
    const double bytes = alloc[i] * ctx.dt_s / 8.0;
    f.allocation = alloc[i];
    f.attainable = attain[i];
    f.delivered_bytes += bytes;
    f.retransmitted_bytes += bytes * link.loss_rate;
    double seen = link.queue_delay_s;
    if (link.congested && link.spec.drain_probe_per_byte > 0.0) {
      const double p_drain = 1.0 - std::exp(-bytes * link.spec.drain_probe_per_byte);
      const auto key = static_cast<std::uint64_t>(f.session_id) * 0x100000001b3ULL +
                       static_cast<std::uint64_t>(link.step_index);
      if (stable_uniform(ctx.seed, key, HashStream::queue_drain) < p_drain) seen = 0.0;
    }
    f.queue_delay = link.queue_delay_s;
    f.min_queue_delay_seen = std::min(f.min_queue_delay_seen, seen);
    ++f.steps;
  }
  ++link.step_index;
}

}  // namespace netexp::sim
