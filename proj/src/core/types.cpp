#include "netexp/core/types.hpp"

#include <charconv>
#include <cmath>

#include "netexp/core/error.hpp"

namespace netexp {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::avg_throughput: return "avg_throughput";
    case Metric::min_rtt: return "min_rtt";
    case Metric::retrans_frac: return "retrans_frac";
    case Metric::bitrate: return "bitrate";
    case Metric::play_delay: return "play_delay";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "avg_throughput" || name == "avg_throughput_bps") return Metric::avg_throughput;
  if (name == "min_rtt" || name == "min_rtt_s") return Metric::min_rtt;
  if (name == "retrans_frac") return Metric::retrans_frac;
  if (name == "bitrate" || name == "bitrate_bps") return Metric::bitrate;
  if (name == "play_delay" || name == "play_delay_s") return Metric::play_delay;
  return std::nullopt;
}

std::int64_t hour_index_of(double start_time_s) {
  return static_cast<std::int64_t>(std::floor(start_time_s / kSecondsPerHour));
}

int hour_of_day_of(double start_time_s) {
  auto h = hour_index_of(start_time_s) % 24;
  return static_cast<int>(h < 0 ? h + 24 : h);
}

void SessionRecord::validate() const {
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::model, "session " + std::to_string(session_id) + ": " + what);
  };
  if (hour_of_day != hour_of_day_of(start_time)) bad("hour_of_day does not match start_time");
  if (treatment != 0 && treatment != 1) bad("treatment must be 0 or 1");
  const double rf = metrics[Metric::retrans_frac];
  if (!(rf >= 0.0 && rf <= 1.0)) bad("retrans_frac outside [0,1]");
  if (!(metrics[Metric::avg_throughput] >= 0.0)) bad("negative avg_throughput");
  if (!(metrics[Metric::min_rtt] > 0.0)) bad("min_rtt must be positive");
}

std::string Estimand::label() const {
  std::string base;
  switch (kind) {
    case EstimandKind::ate: base = "ate"; break;
    case EstimandKind::tte: return "tte";
    case EstimandKind::spillover: base = "spillover"; break;
    case EstimandKind::partial: base = "partial"; break;
  }
  if (!p) return base;
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, *p);
  return base + "(" + std::string(buf, res.ptr) + ")";
}

std::optional<Estimand> Estimand::parse(std::string_view label) {
  if (label == "tte") return Estimand::tte();
  auto open = label.find('(');
  std::string_view name = label.substr(0, open);
  EstimandKind kind;
  if (name == "ate") kind = EstimandKind::ate;
  else if (name == "spillover") kind = EstimandKind::spillover;
  else if (name == "partial") kind = EstimandKind::partial;
  else return std::nullopt;
  if (open == std::string_view::npos) return Estimand{kind, std::nullopt};
  if (label.back() != ')') return std::nullopt;
  std::string_view num = label.substr(open + 1, label.size() - open - 2);
  double p = 0.0;
  auto res = std::from_chars(num.data(), num.data() + num.size(), p);
  if (res.ec != std::errc{} || res.ptr != num.data() + num.size()) return std::nullopt;
  return Estimand{kind, p};
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::hourly ? "hourly" : "account";
}

std::optional<Aggregation> parse_aggregation(std::string_view name) {
  if (name == "hourly") return Aggregation::hourly;
  if (name == "account") return Aggregation::account;
  return std::nullopt;
}

Estimate Estimate::from_point(Estimand estimand, Metric metric, double point, double std_error,
                              std::size_t n_units, Aggregation aggregation) {
  Estimate e;
  e.estimand = estimand;
  e.metric = metric;
  e.point = point;
  e.std_error = std_error;
  e.ci95_lo = point - kZ95 * std_error;
  e.ci95_hi = point + kZ95 * std_error;
  e.n_units = n_units;
  e.aggregation = aggregation;
  return e;
}

}  // namespace netexp
