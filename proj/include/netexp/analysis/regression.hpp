#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netexp/analysis/hourly.hpp"

namespace netexp::analysis {

/// OLS of Z on {intercept, treatment, hour-of-day dummies}. The reference
/// hour is hour 0 when the panel observes it, otherwise the earliest observed
/// hour of day; dummies for unobserved hours are omitted.
struct RegressionFit {
  std::vector<std::string> column_names;
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;
  int reference_hour = 0;

  static constexpr Eigen::Index kTreatmentColumn = 1;
  double treatment_effect() const { return coefficients[kTreatmentColumn]; }
};

RegressionFit ols_fixed_effects(const HourlyPanel& panel);

struct HacResult {
  Eigen::MatrixXd variance;
  std::vector<double> standard_errors;
  int lag = 0;
  std::vector<std::string> warnings;
};

/// Newey-West sandwich with Bartlett weights 1 - l/(L+1). Lags count panel
/// rows in their stored order (t ascending, condition 0 first).
HacResult newey_west_se(const RegressionFit& fit, int lag = 2);

}  // namespace netexp::analysis
