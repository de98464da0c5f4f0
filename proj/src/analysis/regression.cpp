#include "netexp/analysis/regression.hpp"

#include <array>
#include <cmath>

#include "netexp/core/error.hpp"

namespace netexp::analysis {
namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::Index rank_of(const Eigen::MatrixXd& m) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(kRankThreshold);
  return qr.rank();
}

// Names the first column that adds no rank over the columns before it.
[[noreturn]] void report_collinearity(const Eigen::MatrixXd& x,
                                      const std::vector<std::string>& names) {
  for (Eigen::Index j = 1; j <= x.cols(); ++j) {
    if (rank_of(x.leftCols(j)) < j) {
      fail(ErrorCode::collinearity,
           "design matrix is rank deficient: column '" + names[static_cast<std::size_t>(j - 1)] +
               "' is collinear with earlier columns");
    }
  }
  fail(ErrorCode::collinearity, "design matrix is rank deficient");
}

}  // namespace

RegressionFit ols_fixed_effects(const HourlyPanel& panel) {
  if (!panel.has_condition(0) || !panel.has_condition(1)) {
    fail(ErrorCode::empty_group, "ols_fixed_effects: both conditions must be present");
  }
  if (panel.distinct_hours() < 2) {
    fail(ErrorCode::insufficient_data, "ols_fixed_effects: need at least 2 distinct hours");
  }

  std::array<bool, 24> seen{};
  for (const auto& r : panel.rows) seen[static_cast<std::size_t>(r.hour_of_day)] = true;
  int reference = 0;
  while (!seen[static_cast<std::size_t>(reference)]) ++reference;

  RegressionFit fit;
  fit.reference_hour = reference;
  fit.column_names = {"intercept", "treatment"};
  std::array<Eigen::Index, 24> dummy_col{};
  dummy_col.fill(-1);
  for (int h = 0; h < 24; ++h) {
    if (h == reference || !seen[static_cast<std::size_t>(h)]) continue;
    dummy_col[static_cast<std::size_t>(h)] = static_cast<Eigen::Index>(fit.column_names.size());
    fit.column_names.push_back("hour_" + std::to_string(h));
  }

  const auto n = static_cast<Eigen::Index>(panel.rows.size());
  const auto k = static_cast<Eigen::Index>(fit.column_names.size());
  fit.design = Eigen::MatrixXd::Zero(n, k);
  fit.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = panel.rows[static_cast<std::size_t>(i)];
    fit.design(i, 0) = 1.0;
    fit.design(i, 1) = static_cast<double>(row.condition);
    auto col = dummy_col[static_cast<std::size_t>(row.hour_of_day)];
    if (col >= 0) fit.design(i, col) = 1.0;
    fit.response[i] = row.z;
  }

  if (n < k || rank_of(fit.design) < k) report_collinearity(fit.design, fit.column_names);

  const Eigen::MatrixXd xtx = fit.design.transpose() * fit.design;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  fit.coefficients = ldlt.solve(fit.design.transpose() * fit.response);
  fit.xtx_inverse = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.residuals = fit.response - fit.design * fit.coefficients;
  return fit;
}

HacResult newey_west_se(const RegressionFit& fit, int lag) {
  const Eigen::Index n = fit.design.rows();
  const Eigen::Index k = fit.design.cols();
  if (lag < 0 || lag >= n) {
    fail(ErrorCode::invalid_lag, "newey_west_se: lag " + std::to_string(lag) +
                                     " must be in [0, rows) with rows = " + std::to_string(n));
  }

  // Score contributions u_r = e_r * x_r.
  const Eigen::MatrixXd scores = fit.design.array().colwise() * fit.residuals.array();
  Eigen::MatrixXd meat = scores.transpose() * scores;
  for (int l = 1; l <= lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    const Eigen::MatrixXd gamma =
        scores.bottomRows(n - l).transpose() * scores.topRows(n - l);
    meat += w * (gamma + gamma.transpose());
  }

  HacResult out;
  out.lag = lag;
  out.variance = fit.xtx_inverse * meat * fit.xtx_inverse;
  out.standard_errors.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    double v = out.variance(j, j);
    if (v < 0.0) {
      out.warnings.push_back("clamped negative variance " + std::to_string(v) + " for column " +
                             fit.column_names[static_cast<std::size_t>(j)]);
      v = 0.0;
    }
    out.standard_errors[static_cast<std::size_t>(j)] = std::sqrt(v);
  }
  return out;
}

}  // namespace netexp::analysis
