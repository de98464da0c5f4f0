#include "netexp/causal/estimators.hpp"

#include <set>
#include <string>

#include "netexp/analysis/account.hpp"
#include "netexp/analysis/pipeline.hpp"
#include "netexp/core/error.hpp"

namespace netexp::causal {
namespace {

void require_arm(std::span<const SessionRecord* const> records, int treatment,
                 const char* what) {
  for (const auto* r : records) {
    if (r->treatment != treatment) {
      fail(ErrorCode::invalid_design, std::string(what) + " contains session " +
                                          std::to_string(r->session_id) +
                                          " with treatment=" + std::to_string(r->treatment));
    }
  }
}

// The same record may not sit in both sets. Separate runs reuse session ids,
// so identity is by address.
void require_disjoint(std::span<const SessionRecord* const> a,
                      std::span<const SessionRecord* const> b) {
  std::set<const SessionRecord*> seen(a.begin(), a.end());
  for (const auto* r : b) {
    if (seen.count(r)) {
      fail(ErrorCode::invalid_design,
           "cells overlap: session " + std::to_string(r->session_id) + " in both sets");
    }
  }
}

void require_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::invalid_allocation, "allocation p=" + std::to_string(p) + " outside [0,1]");
  }
}

Estimate hourly_contrast(std::span<const SessionRecord* const> one,
                         std::span<const SessionRecord* const> zero, Metric metric,
                         Estimand estimand) {
  if (one.empty() || zero.empty()) {
    fail(ErrorCode::empty_group, estimand.label() + ": empty group");
  }
  auto obs = analysis::observations(one, zero, metric);
  return analysis::hourly_fixed_effects_analysis(obs, estimand, metric);
}

}  // namespace

RecordRefs refs(std::span<const SessionRecord> records) {
  RecordRefs out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  return out;
}

double group_mean(std::span<const SessionRecord> records, Metric metric,
                  const RecordFilter& filter) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (filter(r)) {
      sum += r.value(metric);
      ++n;
    }
  }
  if (n == 0) {
    fail(ErrorCode::empty_group, "group_mean: no records pass the filter for " +
                                     std::string(to_string(metric)));
  }
  return sum / static_cast<double>(n);
}

double group_mean(std::span<const SessionRecord* const> records, Metric metric) {
  if (records.empty()) {
    fail(ErrorCode::empty_group, "group_mean: empty group for " + std::string(to_string(metric)));
  }
  double sum = 0.0;
  for (const auto* r : records) sum += r->value(metric);
  return sum / static_cast<double>(records.size());
}

Estimate naive_ate(std::span<const SessionRecord* const> records, Metric metric, double p) {
  require_p(p);
  std::vector<analysis::Observation> obs;
  obs.reserve(records.size());
  for (const auto* r : records) {
    obs.push_back({r->start_time, r->value(metric), r->treatment, r->account_id});
  }
  return analysis::account_level_analysis(obs, Estimand::ate(p), metric);
}

Estimate naive_ate(std::span<const SessionRecord> records, Metric metric, double p) {
  auto r = refs(records);
  return naive_ate(r, metric, p);
}

Estimate tte_estimate(std::span<const SessionRecord* const> treated,
                      std::span<const SessionRecord* const> control, Metric metric) {
  require_arm(treated, 1, "tte treated cell");
  require_arm(control, 0, "tte control cell");
  require_disjoint(treated, control);
  return hourly_contrast(treated, control, metric, Estimand::tte());
}

Estimate tte_estimate(std::span<const SessionRecord> treated,
                      std::span<const SessionRecord> control, Metric metric) {
  auto t = refs(treated);
  auto c = refs(control);
  return tte_estimate(t, c, metric);
}

Estimate spillover_estimate(std::span<const SessionRecord* const> control_at_p,
                            std::span<const SessionRecord* const> control_at_0, Metric metric,
                            double p) {
  require_p(p);
  if (p >= 1.0) {
    fail(ErrorCode::undefined_spillover, "spillover is only defined for p < 1");
  }
  require_arm(control_at_p, 0, "spillover cell at p");
  require_arm(control_at_0, 0, "spillover baseline cell");
  require_disjoint(control_at_p, control_at_0);
  return hourly_contrast(control_at_p, control_at_0, metric, Estimand::spillover(p));
}

Estimate spillover_estimate(std::span<const SessionRecord> control_at_p,
                            std::span<const SessionRecord> control_at_0, Metric metric, double p) {
  auto a = refs(control_at_p);
  auto b = refs(control_at_0);
  return spillover_estimate(a, b, metric, p);
}

Estimate partial_effect(std::span<const SessionRecord* const> treated_at_p,
                        std::span<const SessionRecord* const> control_at_0, Metric metric,
                        double p) {
  require_p(p);
  require_arm(treated_at_p, 1, "partial-effect treated cell");
  require_arm(control_at_0, 0, "partial-effect baseline cell");
  require_disjoint(treated_at_p, control_at_0);
  return hourly_contrast(treated_at_p, control_at_0, metric, Estimand::partial(p));
}

Estimate partial_effect(std::span<const SessionRecord> treated_at_p,
                        std::span<const SessionRecord> control_at_0, Metric metric, double p) {
  auto a = refs(treated_at_p);
  auto b = refs(control_at_0);
  return partial_effect(a, b, metric, p);
}

}  // namespace netexp::causal
