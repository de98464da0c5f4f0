#include "netexp/sim/specs.hpp"

#include <numeric>
#include <string>

#include "netexp/core/error.hpp"
#include "netexp/core/types.hpp"

namespace netexp::sim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::model, what);
}

}  // namespace

void LinkSpec::validate() const {
  const std::string at = "link " + std::to_string(link_id) + ": ";
  require(std::isfinite(capacity_bps) && capacity_bps > 0, at + "capacity must be > 0");
  require(std::isfinite(base_rtt_s) && base_rtt_s > 0, at + "base_rtt must be > 0");
  require(std::isfinite(standing_queue_delay_s) && standing_queue_delay_s >= 0,
          at + "standing_queue_delay must be >= 0");
  require(base_loss >= 0 && base_loss < 1, at + "base_loss must lie in [0, 1)");
  require(std::isfinite(congestion_loss_multiplier) && congestion_loss_multiplier > 0,
          at + "congestion_loss_multiplier must be > 0");
  require(congestion_threshold > 0 && congestion_threshold <= 1,
          at + "congestion_threshold must lie in (0, 1]");
  require(std::isfinite(drain_probe_per_byte) && drain_probe_per_byte >= 0,
          at + "drain_probe_per_byte must be >= 0");
}

double WorkloadSpec::day_multiplier(int day) const {
  if (day < 0 || static_cast<std::size_t>(day) >= daily_demand_multipliers.size()) return 1.0;
  return daily_demand_multipliers[static_cast<std::size_t>(day)];
}

double WorkloadSpec::expected_arrivals() const {
  const double per_day = std::accumulate(hourly_arrival_rates.begin(),
                                         hourly_arrival_rates.end(), 0.0) * kSecondsPerHour;
  double total = 0.0;
  for (int d = 0; d < n_days; ++d) total += per_day * day_multiplier(d);
  return total;
}

void WorkloadSpec::validate() const {
  for (double r : hourly_arrival_rates) {
    require(std::isfinite(r) && r >= 0, "workload: arrival rates must be finite and >= 0");
  }
  require(std::isfinite(session_duration_s) && session_duration_s > 0,
          "workload: session_duration must be > 0");
  require(!bitrate_ladder_bps.empty(), "workload: bitrate ladder is empty");
  for (std::size_t i = 0; i < bitrate_ladder_bps.size(); ++i) {
    require(bitrate_ladder_bps[i] > 0, "workload: ladder rungs must be > 0");
    if (i > 0) {
      require(bitrate_ladder_bps[i] > bitrate_ladder_bps[i - 1],
              "workload: ladder must be strictly ascending");
    }
  }
  require(ladder_fraction > 0 && ladder_fraction <= 1, "workload: ladder_fraction must lie in (0, 1]");
  require(abr_window_steps >= 1, "workload: abr_window_steps must be >= 1");
  require(startup_bytes >= 0, "workload: startup_bytes must be >= 0");
  require(n_days >= 1, "workload: n_days must be >= 1");
  require(daily_demand_multipliers.empty() ||
              daily_demand_multipliers.size() == static_cast<std::size_t>(n_days),
          "workload: daily_demand_multipliers needs one entry per day");
  for (double m : daily_demand_multipliers) {
    require(std::isfinite(m) && m >= 0, "workload: day multipliers must be >= 0");
  }
  require(n_accounts >= 1, "workload: n_accounts must be >= 1");
  require(persistent_apps >= 0, "workload: persistent_apps must be >= 0");
  require(access_rate_bps > 0, "workload: access_rate_bps must be > 0");
  require(access_rate_spread >= 0, "workload: access_rate_spread must be >= 0");
  require(chunk_duration_s > 0, "workload: chunk_duration_s must be > 0");
  require(ramp_rtts >= 0, "workload: ramp_rtts must be >= 0");
}

std::string_view to_string(TreatmentKind k) {
  switch (k) {
    case TreatmentKind::inert: return "inert";
    case TreatmentKind::weight_multiplier: return "weight_multiplier";
    case TreatmentKind::bitrate_cap: return "bitrate_cap";
    case TreatmentKind::pacing_flag: return "pacing_flag";
    case TreatmentKind::cc_algorithm: return "cc_algorithm";
  }
  return "?";
}

void TreatmentSpec::validate() const {
  switch (kind) {
    case TreatmentKind::inert: break;
    case TreatmentKind::weight_multiplier:
      require(std::isfinite(multiplier) && multiplier > 0, "treatment: multiplier must be > 0");
      break;
    case TreatmentKind::bitrate_cap:
      require(std::isfinite(cap_bps) && cap_bps > 0, "treatment: cap must be > 0");
      break;
    case TreatmentKind::pacing_flag:
      require(std::isfinite(unpaced_weight) && unpaced_weight > 0,
              "treatment: unpaced_weight must be > 0");
      break;
    case TreatmentKind::cc_algorithm:
      require(!algorithm.empty() && !control_algorithm.empty(),
              "treatment: algorithm labels must be non-empty");
      require(algorithm != control_algorithm,
              "treatment: algorithm and control_algorithm must differ");
      break;
  }
}

std::string_view to_string(CompetitionKind k) {
  switch (k) {
    case CompetitionKind::weighted_share: return "weighted_share";
    case CompetitionKind::asymmetric_cc: return "asymmetric_cc";
  }
  return "?";
}

double CompetitionModel::kappa_for(const std::string& algorithm) const {
  auto it = cc_kappa.find(algorithm);
  return it == cc_kappa.end() ? default_cc_kappa : it->second;
}

void CompetitionModel::validate() const {
  require(std::isfinite(loss_exponent) && loss_exponent >= 0, "competition: loss_exponent must be >= 0");
  require(pacing_loss_floor > 0 && pacing_loss_floor <= 1,
          "competition: pacing_loss_floor must lie in (0, 1]");
  require(std::isfinite(default_cc_kappa) && default_cc_kappa >= 0,
          "competition: cc kappa must be >= 0");
  for (const auto& [name, k] : cc_kappa) {
    require(std::isfinite(k) && k >= 0, "competition: cc kappa for " + name + " must be >= 0");
  }
  require(std::isfinite(max_weight) && max_weight >= 1, "competition: max_weight must be >= 1");
}

}  // namespace netexp::sim
