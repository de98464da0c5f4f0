#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "netexp/causal/assignment.hpp"
#include "netexp/causal/estimators.hpp"
#include "netexp/causal/sutva.hpp"
#include "netexp/core/error.hpp"

using namespace netexp;
using namespace netexp::causal;

namespace {

std::vector<std::int64_t> units(std::int64_t n) {
  std::vector<std::int64_t> u(static_cast<std::size_t>(n));
  std::iota(u.begin(), u.end(), 1);
  return u;
}

SessionRecord rec(std::int64_t id, double t, int treatment, double value, std::int64_t account = 0) {
  SessionRecord r;
  r.session_id = id;
  r.account_id = account ? account : id;
  r.start_time = t;
  r.hour_of_day = hour_of_day_of(t);
  r.treatment = treatment;
  r.metrics[Metric::avg_throughput] = value;
  r.metrics[Metric::min_rtt] = 0.02;
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::model;
}

// Two arms spread over 6 hours; treated outcomes shifted by `shift`.
SessionLog two_arm_log(double shift, int per_hour, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SessionLog log;
  std::int64_t id = 1;
  for (int h = 0; h < 6; ++h) {
    for (int k = 0; k < per_hour; ++k) {
      const double t = h * 3600.0 + k * 3600.0 / per_hour;
      log.push_back(rec(id++, t, 0, 10 + h + noise(rng)));
      log.push_back(rec(id++, t, 1, 10 + h + shift + noise(rng)));
    }
  }
  return log;
}

}  // namespace

TEST(Assignment, ZeroAllocationTreatsNobody) {
  const auto a = assign_bernoulli(units(100), 0.0, 7);
  EXPECT_EQ(a.treated_count(), 0u);
}

TEST(Assignment, FullAllocationTreatsEveryone) {
  const auto a = assign_bernoulli(units(100), 1.0, 7);
  EXPECT_EQ(a.treated_count(), 100u);
}

TEST(Assignment, NinetyFivePercentConcentrates) {
  const auto a = assign_bernoulli(units(10000), 0.95, 42);
  EXPECT_GE(a.treated_fraction(), 0.94);
  EXPECT_LE(a.treated_fraction(), 0.96);
}

TEST(Assignment, ReproducibleAndOrderIndependent) {
  auto u = units(500);
  const auto a = assign_bernoulli(u, 0.3, 99);
  const auto b = assign_bernoulli(u, 0.3, 99);
  EXPECT_EQ(a.assignments, b.assignments);
  std::reverse(u.begin(), u.end());
  const auto c = assign_bernoulli(u, 0.3, 99);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_EQ(c.assignments[i], a.assignments[u.size() - 1 - i]);
  }
}

TEST(Assignment, MonotoneInAllocation) {
  for (std::int64_t unit = 1; unit <= 2000; ++unit) {
    if (bernoulli_draw(unit, 0.2, 3)) EXPECT_TRUE(bernoulli_draw(unit, 0.6, 3)) << unit;
  }
}

TEST(Assignment, InvalidAllocation) {
  EXPECT_EQ(code_of([] { assign_bernoulli(units(3), 1.5, 1); }), ErrorCode::invalid_allocation);
  EXPECT_EQ(code_of([] { assign_bernoulli(units(3), -0.1, 1); }), ErrorCode::invalid_allocation);
}

TEST(Assignment, CompleteRandomizationExactCount) {
  for (double p : {0.1, 0.5, 0.9}) {
    const auto a = assign_complete(units(10), p, 11);
    EXPECT_EQ(a.treated_count(), static_cast<std::size_t>(std::lround(10 * p)));
  }
  EXPECT_EQ(complete_treated_count(7, 0.5), 4u);
}

TEST(GroupMean, Basics) {
  SessionLog log{rec(1, 0, 0, 4), rec(2, 0, 0, 6)};
  EXPECT_DOUBLE_EQ(group_mean(log, Metric::avg_throughput), 5.0);
  SessionLog mixed{rec(1, 0, 0, 3), rec(2, 0, 1, 9)};
  EXPECT_DOUBLE_EQ(group_mean(mixed, Metric::avg_throughput, filters::treated), 9.0);
}

TEST(GroupMean, MatchesStreamingMean) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(15.0, 1.0);
  SessionLog log;
  for (int i = 0; i < 1000; ++i) log.push_back(rec(i + 1, i, i % 3 == 0, d(rng)));
  double mean = 0.0;
  int n = 0;
  for (const auto& r : log) {
    if (r.treatment != 0) continue;
    ++n;
    mean += (r.value(Metric::avg_throughput) - mean) / n;
  }
  const double got = group_mean(log, Metric::avg_throughput, filters::control);
  EXPECT_NEAR(got, mean, 1e-12 * std::abs(mean));
}

TEST(GroupMean, EmptyGroupIsError) {
  SessionLog log{rec(1, 0, 0, 4)};
  EXPECT_EQ(code_of([&] { group_mean(log, Metric::avg_throughput, filters::treated); }),
            ErrorCode::empty_group);
}

TEST(NaiveAte, DifferenceOfMeans) {
  SessionLog log{rec(1, 0, 1, 2.0), rec(2, 0, 1, 2.0), rec(3, 0, 0, 1.0), rec(4, 0, 0, 1.0)};
  const auto e = naive_ate(log, Metric::avg_throughput, 0.5);
  EXPECT_DOUBLE_EQ(e.point, 1.0);
  EXPECT_EQ(e.estimand, Estimand::ate(0.5));
}

TEST(NaiveAte, IdenticalOutcomes) {
  SessionLog log{rec(1, 0, 1, 3.0), rec(2, 0, 1, 3.0), rec(3, 0, 0, 3.0), rec(4, 0, 0, 3.0)};
  const auto e = naive_ate(log, Metric::avg_throughput, 0.5);
  EXPECT_DOUBLE_EQ(e.point, 0.0);
  EXPECT_DOUBLE_EQ(e.std_error, 0.0);
}

TEST(NaiveAte, OneSidedIsEmptyGroup) {
  SessionLog log{rec(1, 0, 1, 3.0), rec(2, 0, 1, 4.0)};
  EXPECT_EQ(code_of([&] { naive_ate(log, Metric::avg_throughput, 0.5); }), ErrorCode::empty_group);
}

TEST(Tte, RecoversShiftAcrossHours) {
  const auto log = two_arm_log(1.5, 20, 3);
  SessionLog t, c;
  for (const auto& r : log) (r.treated() ? t : c).push_back(r);
  const auto e = tte_estimate(t, c, Metric::avg_throughput);
  EXPECT_TRUE(e.contains(1.5)) << e.ci95_lo << " " << e.ci95_hi;
  EXPECT_EQ(e.aggregation, Aggregation::hourly);
}

TEST(Tte, WrongArmIsInvalidDesign) {
  const auto log = two_arm_log(0.0, 4, 3);
  EXPECT_EQ(code_of([&] { tte_estimate(log, log, Metric::avg_throughput); }),
            ErrorCode::invalid_design);
}

TEST(Spillover, UndefinedAtFullAllocation) {
  SessionLog c{rec(1, 0, 0, 1.0), rec(2, 3600, 0, 1.0)};
  SessionLog c0{rec(3, 0, 0, 1.0), rec(4, 3600, 0, 1.0)};
  EXPECT_EQ(code_of([&] { spillover_estimate(c, c0, Metric::avg_throughput, 1.0); }),
            ErrorCode::undefined_spillover);
}

TEST(Spillover, OverlappingCellsRejected) {
  SessionLog c{rec(1, 0, 0, 1.0), rec(2, 3600, 0, 2.0)};
  EXPECT_EQ(code_of([&] { spillover_estimate(c, c, Metric::avg_throughput, 0.5); }),
            ErrorCode::invalid_design);
}

TEST(Spillover, InertCoversZero) {
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto log = two_arm_log(0.0, 30, seed);
    SessionLog a, b;
    for (const auto& r : log) {
      SessionRecord x = r;
      x.treatment = 0;
      (r.treated() ? a : b).push_back(x);
    }
    covered += spillover_estimate(a, b, Metric::avg_throughput, 0.5).contains(0.0);
  }
  EXPECT_GE(covered, 32);
}

TEST(Partial, FullAllocationMatchesTte) {
  const auto log = two_arm_log(0.8, 10, 4);
  SessionLog t, c;
  for (const auto& r : log) (r.treated() ? t : c).push_back(r);
  const auto a = partial_effect(t, c, Metric::avg_throughput, 1.0);
  const auto b = tte_estimate(t, c, Metric::avg_throughput);
  EXPECT_DOUBLE_EQ(a.point, b.point);
  EXPECT_DOUBLE_EQ(a.std_error, b.std_error);
}

namespace {

Estimate est(Estimand e, double point, double se) {
  return Estimate::from_point(e, Metric::avg_throughput, point, se, 100, Aggregation::account);
}

}  // namespace

TEST(Sutva, InertSweepRaisesNoFlags) {
  std::vector<SweepPoint> sweep;
  for (double p : {0.1, 0.5, 0.9}) {
    sweep.push_back({p, est(Estimand::ate(p), 0.01 * p, 0.1), est(Estimand::spillover(p), -0.02, 0.1),
                     est(Estimand::partial(p), 0.01, 0.1)});
  }
  const auto rep = sutva_diagnostic(sweep, est(Estimand::tte(), 0.0, 0.1));
  EXPECT_FALSE(rep.interference_detected);
  EXPECT_FALSE(rep.interference_bonferroni);
}

TEST(Sutva, ShiftedTauFlagsTauVersusTte) {
  std::vector<SweepPoint> sweep;
  for (double p : {0.1, 0.5, 0.9}) {
    sweep.push_back({p, est(Estimand::ate(p), -5.0, 0.1), est(Estimand::spillover(p), 0.0, 0.1),
                     std::nullopt});
  }
  const auto rep = sutva_diagnostic(sweep, est(Estimand::tte(), 0.0, 0.1));
  EXPECT_TRUE(rep.failed(SutvaCondition::tau_equals_tte));
  EXPECT_FALSE(rep.failed(SutvaCondition::tau_constant));
  EXPECT_TRUE(rep.interference_bonferroni);
}

TEST(Sutva, NeedsTwoAllocations) {
  std::vector<SweepPoint> sweep{{0.5, est(Estimand::ate(0.5), 0.0, 1.0), std::nullopt, std::nullopt}};
  EXPECT_EQ(code_of([&] { sutva_diagnostic(sweep); }), ErrorCode::insufficient_sweep);
}

TEST(Sutva, ZeroErrorEqualityRules) {
  EXPECT_DOUBLE_EQ(equality_p_value(1.0, 0.0, 1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(equality_p_value(1.0, 0.0, 2.0, 0.0), 0.0);
  double z = 0.0;
  const double p = equality_p_value(1.96, 1.0, 0.0, 0.0, &z);
  EXPECT_NEAR(z, 1.96, 1e-12);
  EXPECT_NEAR(p, 0.05, 1e-3);
}
