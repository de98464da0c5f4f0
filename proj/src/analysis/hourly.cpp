#include "netexp/analysis/hourly.hpp"

#include <map>
#include <set>
#include <utility>

#include "netexp/core/error.hpp"

namespace netexp::analysis {

std::vector<Observation> observations(std::span<const SessionRecord> records, Metric metric) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({r.start_time, r.value(metric), r.treatment, r.account_id});
  }
  return out;
}

std::vector<Observation> observations(std::span<const SessionRecord* const> condition1,
                                      std::span<const SessionRecord* const> condition0,
                                      Metric metric) {
  std::vector<Observation> out;
  out.reserve(condition1.size() + condition0.size());
  for (const auto* r : condition1) out.push_back({r->start_time, r->value(metric), 1, r->account_id});
  for (const auto* r : condition0) out.push_back({r->start_time, r->value(metric), 0, r->account_id});
  return out;
}

std::size_t HourlyPanel::sessions() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.n;
  return n;
}

bool HourlyPanel::has_condition(int condition) const {
  for (const auto& r : rows) {
    if (r.condition == condition) return true;
  }
  return false;
}

std::size_t HourlyPanel::distinct_hours() const {
  std::set<std::int64_t> ts;
  for (const auto& r : rows) ts.insert(r.t);
  return ts.size();
}

HourlyPanel hourly_aggregate(std::span<const Observation> obs) {
  if (obs.empty()) fail(ErrorCode::empty_group, "hourly_aggregate: no sessions");
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::int64_t, int>, Acc> groups;
  for (const auto& o : obs) {
    auto& g = groups[{hour_index_of(o.start_time), o.condition}];
    g.sum += o.value;
    ++g.n;
  }
  HourlyPanel panel;
  panel.rows.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    const auto [t, condition] = key;
    int hod = static_cast<int>(t % 24);
    if (hod < 0) hod += 24;
    panel.rows.push_back({t, hod, condition, acc.sum / static_cast<double>(acc.n), acc.n});
  }
  return panel;
}

HourlyPanel hourly_aggregate(std::span<const SessionRecord> records, Metric metric) {
  auto obs = observations(records, metric);
  return hourly_aggregate(obs);
}

}  // namespace netexp::analysis
