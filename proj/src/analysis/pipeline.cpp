#include "netexp/analysis/pipeline.hpp"

#include "netexp/analysis/regression.hpp"
#include "netexp/core/error.hpp"

namespace netexp::analysis {

Estimate hourly_fixed_effects_analysis(std::span<const Observation> obs, Estimand estimand,
                                       Metric metric, int lag) {
  try {
    const auto panel = hourly_aggregate(obs);
    const auto fit = ols_fixed_effects(panel);
    const auto hac = newey_west_se(fit, lag);
    return Estimate::from_point(estimand, metric, fit.treatment_effect(),
                                hac.standard_errors[RegressionFit::kTreatmentColumn],
                                panel.sessions(), Aggregation::hourly);
  } catch (const Error& e) {
    throw Error(e.code(), estimand.label() + " on " + std::string(to_string(metric)) + ": " +
                              e.what());
  }
}

}  // namespace netexp::analysis
