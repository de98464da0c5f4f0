#include "netexp/causal/sutva.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "netexp/core/error.hpp"

namespace netexp::causal {

std::string_view to_string(SutvaCondition c) {
  switch (c) {
    case SutvaCondition::tau_constant: return "tau_constant";
    case SutvaCondition::partial_equals_tau: return "partial_equals_tau";
    case SutvaCondition::spillover_zero: return "spillover_zero";
    case SutvaCondition::tau_equals_tte: return "tau_equals_tte";
  }
  return "unknown";
}

bool SutvaReport::failed(SutvaCondition c) const {
  return std::find(failed_conditions.begin(), failed_conditions.end(), c) !=
         failed_conditions.end();
}

double equality_p_value(double a, double se_a, double b, double se_b, double* z_out) {
  const double diff = a - b;
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  double z;
  if (se > 0.0) {
    z = diff / se;
  } else if (diff == 0.0) {
    z = 0.0;
  } else {
    z = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  if (z_out) *z_out = z;
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

SutvaReport sutva_diagnostic(std::span<const SweepPoint> sweep, const std::optional<Estimate>& tte,
                             double alpha) {
  std::set<double> allocations;
  std::optional<Metric> metric;
  auto check_metric = [&](const std::optional<Estimate>& e) {
    if (!e) return;
    if (metric && *metric != e->metric) {
      fail(ErrorCode::insufficient_sweep, "sweep mixes metrics");
    }
    metric = e->metric;
  };
  for (const auto& pt : sweep) {
    if (pt.tau || pt.spillover || pt.partial) allocations.insert(pt.p);
    check_metric(pt.tau);
    check_metric(pt.spillover);
    check_metric(pt.partial);
  }
  check_metric(tte);
  if (allocations.size() < 2) {
    fail(ErrorCode::insufficient_sweep, "sutva_diagnostic needs at least 2 distinct allocations");
  }

  SutvaReport report;
  report.metric = *metric;
  report.alpha = alpha;
  auto add = [&](SutvaCondition c, double p_i, std::optional<double> p_j, const Estimate& a,
                 double b, double se_b) {
    EqualityTest t;
    t.condition = c;
    t.p_i = p_i;
    t.p_j = p_j;
    t.difference = a.point - b;
    t.p_value = equality_p_value(a.point, a.std_error, b, se_b, &t.z);
    report.tests.push_back(t);
  };

  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& a = sweep[i];
    if (a.tau) {
      for (std::size_t j = i + 1; j < sweep.size(); ++j) {
        const auto& b = sweep[j];
        if (b.tau) add(SutvaCondition::tau_constant, a.p, b.p, *a.tau, b.tau->point, b.tau->std_error);
      }
      if (a.partial) {
        add(SutvaCondition::partial_equals_tau, a.p, std::nullopt, *a.partial, a.tau->point,
            a.tau->std_error);
      }
      if (tte) add(SutvaCondition::tau_equals_tte, a.p, std::nullopt, *a.tau, tte->point, tte->std_error);
    }
    if (a.spillover) add(SutvaCondition::spillover_zero, a.p, std::nullopt, *a.spillover, 0.0, 0.0);
  }

  const double bonferroni = alpha / static_cast<double>(std::max<std::size_t>(1, report.tests.size()));
  for (auto& t : report.tests) {
    t.reject = t.p_value < alpha;
    t.reject_bonferroni = t.p_value < bonferroni;
    auto note = [&](std::vector<SutvaCondition>& list) {
      if (std::find(list.begin(), list.end(), t.condition) == list.end()) list.push_back(t.condition);
    };
    if (t.reject) {
      report.interference_detected = true;
      note(report.failed_conditions);
    }
    if (t.reject_bonferroni) {
      report.interference_bonferroni = true;
      note(report.failed_conditions_bonferroni);
    }
  }
  return report;
}

}  // namespace netexp::causal
