#include "netexp/analysis/account.hpp"

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "netexp/core/error.hpp"

namespace netexp::analysis {
namespace {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // sample variance, 0 when n < 2
  std::size_t n = 0;
};

MeanVar summarize(const std::vector<double>& xs) {
  MeanVar mv;
  mv.n = xs.size();
  double s = 0.0;
  for (double x : xs) s += x;
  mv.mean = s / static_cast<double>(mv.n);
  if (mv.n >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mv.mean) * (x - mv.mean);
    mv.var = ss / static_cast<double>(mv.n - 1);
  }
  return mv;
}

}  // namespace

Estimate account_level_analysis(std::span<const Observation> obs, Estimand estimand,
                                Metric metric) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<int, std::int64_t>, Acc> by_account;
  for (const auto& o : obs) {
    auto& a = by_account[{o.condition, o.account_id}];
    a.sum += o.value;
    ++a.n;
  }
  std::vector<double> means[2];
  for (const auto& [key, acc] : by_account) {
    means[key.first == 1 ? 1 : 0].push_back(acc.sum / static_cast<double>(acc.n));
  }
  if (means[0].empty() || means[1].empty()) {
    fail(ErrorCode::empty_group, "account_level_analysis: " + estimand.label() + " on " +
                                     std::string(to_string(metric)) +
                                     " needs both conditions");
  }
  const auto treated = summarize(means[1]);
  const auto control = summarize(means[0]);
  const double se = std::sqrt(treated.var / static_cast<double>(treated.n) +
                              control.var / static_cast<double>(control.n));
  return Estimate::from_point(estimand, metric, treated.mean - control.mean, se,
                              treated.n + control.n, Aggregation::account);
}

Estimate account_level_analysis(std::span<const SessionRecord> records, Metric metric,
                                Estimand estimand) {
  auto obs = observations(records, metric);
  return account_level_analysis(obs, estimand, metric);
}

}  // namespace netexp::analysis
