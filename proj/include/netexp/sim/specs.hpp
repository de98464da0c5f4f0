#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace netexp::sim {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();
inline constexpr double kSecondsPerDay = 86400.0;

struct LinkSpec {
  int link_id = 1;
  double capacity_bps = 100e6;
  double base_rtt_s = 0.02;
  // Added to every RTT while offered load meets capacity; one base RTT is a 1 BDP buffer.
  double standing_queue_delay_s = 0.02;
  double base_loss = 0.001;
  double congestion_loss_multiplier = 1.0;
  // Utilization at which the standing queue forms. Below 1 it stands in for
  // bursty chunk downloads queueing before average load reaches capacity.
  double congestion_threshold = 1.0;
  // Chance per transmitted byte of observing the standing queue drained during
  // a congested step. 0 keeps the queue strictly two-regime.
  double drain_probe_per_byte = 0.0;

  void validate() const;
  bool operator==(const LinkSpec&) const = default;
};

struct WorkloadSpec {
  std::array<double, 24> hourly_arrival_rates{};  // sessions/s by hour of day
  double session_duration_s = 900.0;
  std::vector<double> bitrate_ladder_bps{1e6, 2e6, 3e6, 4e6, 6e6, 8e6};
  double ladder_fraction = 0.8;
  int abr_window_steps = 3;  // trailing steps averaged for the throughput estimate
  double startup_bytes = 2e6;
  int n_days = 1;
  std::vector<double> daily_demand_multipliers;  // empty means 1 for every day
  std::int64_t n_accounts = 2000;
  // When > 0, this many backlogged applications run for the whole horizon and
  // each emits consecutive session records; arrival rates are then unused.
  int persistent_apps = 0;
  // Per-session access-link rate; bounds attainable throughput and backlogged demand.
  double access_rate_bps = kUnbounded;
  // Log-normal spread of access rates across accounts (sigma of the log);
  // access_rate_bps is then the median.
  double access_rate_spread = 0.0;
  // Measured throughput includes a TCP ramp of ramp_rtts round trips per chunk
  // of chunk_duration_s of video: A * S / (S + A * ramp_rtts * rtt), S = bitrate * chunk.
  // ramp_rtts = 0 reports the attainable rate itself.
  double chunk_duration_s = 4.0;
  double ramp_rtts = 0.0;

  double horizon_s() const { return n_days * kSecondsPerDay; }
  double day_multiplier(int day) const;
  double expected_arrivals() const;
  bool persistent() const { return persistent_apps > 0; }

  void validate() const;
  bool operator==(const WorkloadSpec&) const = default;
};

enum class TreatmentKind { inert, weight_multiplier, bitrate_cap, pacing_flag, cc_algorithm };

std::string_view to_string(TreatmentKind k);

struct TreatmentSpec {
  TreatmentKind kind = TreatmentKind::inert;
  double multiplier = 2.0;      // weight_multiplier
  double cap_bps = 0.0;         // bitrate_cap
  double unpaced_weight = 2.0;  // pacing_flag: paced flows compete at weight 1
  std::string algorithm = "bbr";            // cc_algorithm
  std::string control_algorithm = "cubic";  // cc_algorithm

  void validate() const;
  bool operator==(const TreatmentSpec&) const = default;
};

enum class CompetitionKind { weighted_share, asymmetric_cc };

std::string_view to_string(CompetitionKind k);

struct CompetitionModel {
  CompetitionKind kind = CompetitionKind::weighted_share;
  // Congested loss scales with (mean flow weight)^loss_exponent; log2(3)
  // makes an all-weight-2 population lose 3x an all-weight-1 one.
  double loss_exponent = std::log2(3.0);
  // Loss multiplier of a fully paced population; rises linearly to 1 with the
  // unpaced byte fraction.
  double pacing_loss_floor = 0.25;
  // Advantage curve r(f) = 1 + kappa * (1 - f) for each algorithm at own flow fraction f.
  double default_cc_kappa = 3.0;
  std::map<std::string, double> cc_kappa;
  double max_weight = 1e3;

  double kappa_for(const std::string& algorithm) const;
  void validate() const;
  bool operator==(const CompetitionModel&) const = default;
};

/// Per-flow carrier of the quantities that become a session's metrics.
struct FlowState {
  std::size_t session = 0;  // index into the scenario session table
  std::int64_t session_id = 0;
  double demand = 0.0;  // bits/s; kUnbounded for backlogged transfers
  double weight = 1.0;
  bool unpaced = true;
  double start_time = 0.0;
  double end_time = 0.0;
  double delivered_bytes = 0.0;
  double retransmitted_bytes = 0.0;
  double min_queue_delay_seen = std::numeric_limits<double>::infinity();

  // Most recent step.
  double allocation = 0.0;  // bits/s delivered
  double attainable = 0.0;  // bits/s a backlogged transfer would have received
  double queue_delay = 0.0;
  int steps = 0;
};

/// One link at one simulated instant.
struct LinkState {
  LinkSpec spec;
  std::size_t active_flows = 0;
  double offered_bps = 0.0;
  double allocated_bps = 0.0;
  double utilization = 0.0;  // offered / capacity
  double queue_delay_s = 0.0;
  double loss_rate = 0.0;
  bool congested = false;
  std::int64_t step_index = 0;
};

}  // namespace netexp::sim
