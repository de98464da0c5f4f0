#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::causal {

/// Estimates observed at one allocation of a sweep or gradual deployment.
struct SweepPoint {
  double p = 0.0;
  std::optional<Estimate> tau;
  std::optional<Estimate> spillover;
  std::optional<Estimate> partial;
};

enum class SutvaCondition {
  tau_constant,        // tau(p_i) == tau(p_j)
  partial_equals_tau,  // rho(p_i) == tau(p_i)
  spillover_zero,      // s(p_i) == 0
  tau_equals_tte,      // tau(p_i) == TTE
};

std::string_view to_string(SutvaCondition c);

struct EqualityTest {
  SutvaCondition condition = SutvaCondition::tau_constant;
  double p_i = 0.0;
  std::optional<double> p_j;
  double difference = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool reject = false;             // raw, at alpha
  bool reject_bonferroni = false;  // at alpha / number of tests
};

struct SutvaReport {
  Metric metric = Metric::avg_throughput;
  double alpha = 0.05;
  std::vector<EqualityTest> tests;
  bool interference_detected = false;     // any raw rejection
  bool interference_bonferroni = false;   // any rejection after correction
  std::vector<SutvaCondition> failed_conditions;  // raw
  std::vector<SutvaCondition> failed_conditions_bonferroni;

  bool failed(SutvaCondition c) const;
};

/// Two-sided z-tests of the no-interference equalities, treating the
/// estimates as independent. Equal points with zero standard errors never
/// reject; unequal points with zero standard errors always do.
SutvaReport sutva_diagnostic(std::span<const SweepPoint> sweep,
                             const std::optional<Estimate>& tte = std::nullopt,
                             double alpha = 0.05);

/// Two-sided normal p-value for the difference of two independent estimates.
double equality_p_value(double a, double se_a, double b, double se_b, double* z_out = nullptr);

}  // namespace netexp::causal
