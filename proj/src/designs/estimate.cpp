#include "netexp/analysis/account.hpp"
#include "netexp/analysis/hourly.hpp"
#include "netexp/analysis/normalize.hpp"
#include "netexp/analysis/pipeline.hpp"
#include "netexp/causal/estimators.hpp"
#include "netexp/core/error.hpp"
#include "netexp/designs/plan.hpp"

namespace netexp::designs {

namespace {

causal::RecordRefs select(std::span<const SessionRecord> log, const CellPredicate& pred) {
  causal::RecordRefs out;
  for (const auto& r : log) {
    if (pred.matches(r)) out.push_back(&r);
  }
  return out;
}

}  // namespace

std::vector<Estimate> estimate_all(std::span<const SessionRecord> log, const CellMap& cells,
                                   std::span<const Metric> metrics) {
  causal::RecordRefs norm_cell;
  if (cells.normalization_cell) norm_cell = select(log, *cells.normalization_cell);

  std::vector<Estimate> out;
  for (const auto& e : cells.entries) {
    const std::string label = e.estimand.label();
    if (!e.numerator.disjoint_from(e.denominator)) {
      fail(ErrorCode::invalid_design, label + ": numerator and denominator cells overlap");
    }
    const auto num = select(log, e.numerator);
    const auto den = select(log, e.denominator);
    if (num.empty() || den.empty()) {
      fail(ErrorCode::empty_group, label + ": no sessions in cell " +
                                       (num.empty() ? e.numerator : e.denominator).describe());
    }
    for (Metric m : metrics) {
      const auto obs = analysis::observations(num, den, m);
      Estimate est = e.analysis == Aggregation::hourly
                         ? analysis::hourly_fixed_effects_analysis(obs, e.estimand, m)
                         : analysis::account_level_analysis(obs, e.estimand, m);
      if (!norm_cell.empty()) {
        const double base = causal::group_mean(norm_cell, m);
        if (base > 0.0) est = analysis::normalize(est, base);
      }
      out.push_back(std::move(est));
    }
  }
  return out;
}

}  // namespace netexp::designs
