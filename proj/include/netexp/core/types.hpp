#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace netexp {

enum class Metric : std::uint8_t {
  avg_throughput,
  min_rtt,
  retrans_frac,
  bitrate,
  play_delay,
};

inline constexpr std::size_t kMetricCount = 5;

inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::avg_throughput, Metric::min_rtt, Metric::retrans_frac, Metric::bitrate,
    Metric::play_delay};

std::string_view to_string(Metric m);
/// Accepts the metric names and the session-log column names (avg_throughput_bps, ...).
std::optional<Metric> parse_metric(std::string_view name);

class MetricValues {
 public:
  double& operator[](Metric m) { return values_[static_cast<std::size_t>(m)]; }
  double operator[](Metric m) const { return values_[static_cast<std::size_t>(m)]; }
  bool operator==(const MetricValues&) const = default;

 private:
  std::array<double, kMetricCount> values_{};
};

inline constexpr double kSecondsPerHour = 3600.0;

/// Chronological hour index since scenario start.
std::int64_t hour_index_of(double start_time_s);
int hour_of_day_of(double start_time_s);

/// One completed session: the unit every estimator consumes.
struct SessionRecord {
  std::int64_t session_id = 0;
  std::int64_t account_id = 0;
  int link_id = 1;
  double start_time = 0.0;
  int hour_of_day = 0;
  int treatment = 0;
  std::string cell;
  MetricValues metrics;

  double value(Metric m) const { return metrics[m]; }
  std::int64_t hour_index() const { return hour_index_of(start_time); }
  bool treated() const { return treatment == 1; }

  /// Throws Error(model) when a record invariant is broken.
  void validate() const;

  bool operator==(const SessionRecord&) const = default;
};

using SessionLog = std::vector<SessionRecord>;

enum class EstimandKind { ate, tte, spillover, partial };

struct Estimand {
  EstimandKind kind = EstimandKind::ate;
  std::optional<double> p;

  static Estimand ate(double p) { return {EstimandKind::ate, p}; }
  static Estimand tte() { return {EstimandKind::tte, std::nullopt}; }
  static Estimand spillover(double p) { return {EstimandKind::spillover, p}; }
  static Estimand partial(double p) { return {EstimandKind::partial, p}; }

  /// "ate(0.95)", "tte", "spillover(0.95)", "partial(0.5)".
  std::string label() const;
  static std::optional<Estimand> parse(std::string_view label);

  bool operator==(const Estimand&) const = default;
};

enum class Aggregation { hourly, account };

std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view name);

struct ScaledValues {
  double point = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  bool operator==(const ScaledValues&) const = default;
};

inline constexpr double kZ95 = 1.96;

struct Estimate {
  Estimand estimand;
  Metric metric = Metric::avg_throughput;
  double point = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::optional<double> normalization_base;
  // Set together with normalization_base; raw fields above are never rescaled.
  std::optional<ScaledValues> normalized;
  std::size_t n_units = 0;
  Aggregation aggregation = Aggregation::hourly;

  static Estimate from_point(Estimand estimand, Metric metric, double point, double std_error,
                             std::size_t n_units, Aggregation aggregation);

  bool contains(double value) const { return ci95_lo <= value && value <= ci95_hi; }
  bool operator==(const Estimate&) const = default;
};

}  // namespace netexp
