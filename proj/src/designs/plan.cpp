#include "netexp/designs/plan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "netexp/core/error.hpp"
#include "netexp/core/hash.hpp"

namespace netexp::designs {

namespace {

constexpr double kDay = 86400.0;
constexpr int kMaxLabelRedraws = 32;

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::invalid_design, what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void check_frame(const PlanFrame& frame) {
  require(std::isfinite(frame.horizon_s) && frame.horizon_s > 0, "plan horizon must be > 0");
  require(!frame.links.empty(), "plan needs at least one link");
}

DesignPlan base_plan(DesignKind kind, const PlanFrame& frame, std::uint64_t seed) {
  DesignPlan plan;
  plan.kind = kind;
  plan.horizon_s = frame.horizon_s;
  plan.links = frame.links;
  plan.assignment_seed = seed;
  return plan;
}

void uniform_segments(DesignPlan& plan, double p) {
  for (int link : plan.links) plan.segments.push_back({link, 0.0, plan.horizon_s, p, ""});
}

void paired_segments(DesignPlan& plan, double p_high, double p_low) {
  require(plan.links.size() >= 2, "paired-link designs need two links");
  require(0 < p_low && p_low < p_high && p_high < 1,
          "paired-link needs 0 < p_low < p_high < 1, got p_high=" + fmt(p_high) +
              " p_low=" + fmt(p_low));
  plan.p_high = p_high;
  plan.p_low = p_low;
  plan.segments.push_back({plan.links[0], 0.0, plan.horizon_s, p_high, ""});
  plan.segments.push_back({plan.links[1], 0.0, plan.horizon_s, p_low, ""});
  for (std::size_t i = 2; i < plan.links.size(); ++i) {
    plan.segments.push_back({plan.links[i], 0.0, plan.horizon_s, 0.0, ""});
  }
}

CellPredicate on(std::optional<int> link, std::optional<int> treatment,
                 std::vector<TimeWindow> windows = {}) {
  return CellPredicate{link, treatment, std::move(windows)};
}

void add(CellMap& cells, Estimand e, CellPredicate num, CellPredicate den, Aggregation a) {
  cells.entries.push_back({e, std::move(num), std::move(den), a});
}

void disable(CellMap& cells, const Estimand& e, const std::string& why) {
  cells.disabled.push_back(e.label() + ": " + why);
}

// Naive within-cell A/B at allocation p, or a disabled note when an arm is empty.
void add_naive(CellMap& cells, double p, std::optional<int> link, std::vector<TimeWindow> windows) {
  const Estimand e = Estimand::ate(p);
  if (p <= 0.0 || p >= 1.0) {
    disable(cells, e, "one arm is empty at p=" + fmt(p));
    return;
  }
  add(cells, e, on(link, 1, windows), on(link, 0, windows), Aggregation::account);
}

std::vector<TimeWindow> interval_windows(const DesignPlan& plan, bool treated) {
  std::vector<TimeWindow> w;
  for (std::size_t k = 0; k < plan.interval_treated.size(); ++k) {
    if (plan.interval_treated[k] != treated) continue;
    const double start = static_cast<double>(k) * plan.interval_length_s;
    const double end = std::min(plan.horizon_s, start + plan.interval_length_s);
    if (start + plan.burn_in_s < end) w.push_back({start + plan.burn_in_s, end});
  }
  return w;
}

std::vector<bool> draw_labels(std::size_t n, IntervalLabeling labeling, std::uint64_t seed,
                              int& redraws) {
  redraws = 0;
  std::vector<bool> labels(n);
  if (labeling == IntervalLabeling::alternating) {
    const bool first = stable_uniform(seed, 0, HashStream::interval_label) < 0.5;
    for (std::size_t k = 0; k < n; ++k) labels[k] = (k % 2 == 0) == first;
    return labels;
  }
  for (int attempt = 0; attempt <= kMaxLabelRedraws; ++attempt) {
    const std::uint64_t salt = static_cast<std::uint64_t>(attempt) << 32;
    for (std::size_t k = 0; k < n; ++k) {
      labels[k] = stable_uniform(seed, salt | (k + 1), HashStream::interval_label) < 0.5;
    }
    const auto t = std::count(labels.begin(), labels.end(), true);
    if (t > 0 && static_cast<std::size_t>(t) < n) return labels;
    ++redraws;
  }
  fail(ErrorCode::invalid_design, "switchback labels degenerate after " +
                                      std::to_string(kMaxLabelRedraws) + " re-draws");
}

double mean_multiplier(const std::vector<double>& m, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t d = from; d < to; ++d) s += d < m.size() ? m[d] : 1.0;
  return to > from ? s / static_cast<double>(to - from) : 1.0;
}

}  // namespace

std::string_view to_string(DesignKind k) {
  switch (k) {
    case DesignKind::ab: return "ab";
    case DesignKind::paired_link: return "paired_link";
    case DesignKind::switchback: return "switchback";
    case DesignKind::event_study: return "event_study";
    case DesignKind::gradual: return "gradual";
    case DesignKind::aa: return "aa";
  }
  return "?";
}

std::string_view to_string(AssignmentMode m) {
  return m == AssignmentMode::complete ? "complete" : "bernoulli";
}

std::string_view to_string(IntervalLabeling l) {
  return l == IntervalLabeling::alternating ? "alternating" : "coin";
}

std::string_view to_string(DesignSource s) {
  return s == DesignSource::paired_link ? "paired_link" : "direct";
}

bool DesignPlan::has_link(int link_id) const {
  return std::find(links.begin(), links.end(), link_id) != links.end();
}

const AllocationSegment& DesignPlan::segment(int link_id, double t) const {
  const AllocationSegment* last = nullptr;
  for (const auto& s : segments) {
    if (s.link_id != link_id) continue;
    if (s.start_s <= t && t < s.end_s) return s;
    last = &s;
  }
  if (last != nullptr && t >= horizon_s) return *last;
  fail(ErrorCode::invalid_design,
       "no allocation segment for link " + std::to_string(link_id) + " at t=" + fmt(t));
}

double DesignPlan::allocation(int link_id, double t) const { return segment(link_id, t).p; }

std::string DesignPlan::cell_label(int link_id, double t, bool treated) const {
  const auto& s = segment(link_id, t);
  std::string label = "link" + std::to_string(link_id);
  if (!s.label.empty()) label += ":" + s.label;
  return label + (treated ? ":T" : ":C");
}

std::vector<std::string> DesignPlan::cells() const {
  std::vector<std::string> out;
  for (const auto& s : segments) {
    std::string base = "link" + std::to_string(s.link_id);
    if (!s.label.empty()) base += ":" + s.label;
    if (s.p > 0.0) out.push_back(base + ":T");
    if (s.p < 1.0) out.push_back(base + ":C");
  }
  return out;
}

void DesignPlan::validate() const {
  require(horizon_s > 0, "plan horizon must be > 0");
  require(!links.empty(), "plan has no links");
  for (int link : links) {
    std::vector<const AllocationSegment*> mine;
    for (const auto& s : segments) {
      if (s.link_id == link) mine.push_back(&s);
    }
    const std::string at = "link " + std::to_string(link) + ": ";
    require(!mine.empty(), at + "no allocation segments");
    std::sort(mine.begin(), mine.end(),
              [](auto* a, auto* b) { return a->start_s < b->start_s; });
    double cursor = 0.0;
    for (const auto* s : mine) {
      require(is_probability(s->p), at + "allocation " + fmt(s->p) + " outside [0, 1]");
      require(s->start_s == cursor, at + "segments leave a gap or overlap at t=" + fmt(cursor));
      require(s->end_s > s->start_s, at + "empty segment at t=" + fmt(s->start_s));
      cursor = s->end_s;
    }
    require(cursor == horizon_s, at + "segments end at " + fmt(cursor) + ", horizon is " +
                                     fmt(horizon_s));
  }
  for (const auto& s : segments) require(has_link(s.link_id), "segment on unknown link");
  if (kind == DesignKind::switchback) {
    const auto t = std::count(interval_treated.begin(), interval_treated.end(), true);
    require(interval_treated.size() >= 2, "switchback needs at least 2 intervals");
    require(t > 0 && static_cast<std::size_t>(t) < interval_treated.size(),
            "switchback needs both treatment and control intervals");
  }
}

PlannedDesign plan_ab(double p, const PlanFrame& frame, AssignmentMode mode) {
  check_frame(frame);
  require(is_probability(p), "allocation " + fmt(p) + " outside [0, 1]");
  PlannedDesign d{base_plan(DesignKind::ab, frame, frame.seed), {}};
  d.plan.assignment = mode;
  uniform_segments(d.plan, p);
  add_naive(d.cells, p, std::nullopt, {});
  if (p < 1.0) d.cells.normalization_cell = on(std::nullopt, 0);
  d.plan.validate();
  return d;
}

PlannedDesign plan_paired_link(double p_high, double p_low, const PlanFrame& frame) {
  check_frame(frame);
  PlannedDesign d{base_plan(DesignKind::paired_link, frame, frame.seed), {}};
  paired_segments(d.plan, p_high, p_low);
  const int l1 = frame.links[0], l2 = frame.links[1];
  auto& c = d.cells;
  add(c, Estimand::tte(), on(l1, 1), on(l2, 0), Aggregation::hourly);
  add(c, Estimand::spillover(p_high), on(l1, 0), on(l2, 0), Aggregation::hourly);
  add_naive(c, p_high, l1, {});
  add_naive(c, p_low, l2, {});
  c.normalization_cell = on(l2, 0);
  d.plan.validate();
  return d;
}

PlannedDesign plan_switchback(double interval_length_s, double within_alloc,
                              const PlanFrame& frame, IntervalLabeling labeling, double burn_in_s,
                              DesignSource source, double p_high, double p_low) {
  check_frame(frame);
  require(std::isfinite(interval_length_s) && interval_length_s > 0,
          "switchback interval length must be > 0");
  require(frame.horizon_s / interval_length_s >= 2.0,
          "switchback needs horizon / interval_length >= 2");
  require(within_alloc > 0.5 && within_alloc <= 1.0,
          "switchback within_alloc must lie in (0.5, 1], got " + fmt(within_alloc));
  require(burn_in_s >= 0 && burn_in_s < interval_length_s,
          "switchback burn_in must lie in [0, interval_length)");

  PlannedDesign d{base_plan(DesignKind::switchback, frame, frame.seed), {}};
  auto& plan = d.plan;
  plan.source = source;
  plan.interval_length_s = interval_length_s;
  plan.within_alloc = within_alloc;
  plan.burn_in_s = burn_in_s;
  const auto n = static_cast<std::size_t>(std::ceil(frame.horizon_s / interval_length_s - 1e-9));
  plan.interval_treated = draw_labels(n, labeling, plan.assignment_seed, plan.label_redraws);
  if (plan.label_redraws > 0) {
    plan.warnings.push_back("switchback labels re-drawn " + std::to_string(plan.label_redraws) +
                            " time(s)");
  }

  const auto t_windows = interval_windows(plan, true);
  const auto c_windows = interval_windows(plan, false);
  auto& c = d.cells;
  if (source == DesignSource::paired_link) {
    paired_segments(plan, p_high, p_low);
    const int l1 = frame.links[0], l2 = frame.links[1];
    add(c, Estimand::tte(), on(l1, 1, t_windows), on(l2, 0, c_windows), Aggregation::hourly);
    add(c, Estimand::spillover(p_high), on(l1, 0, t_windows), on(l2, 0, c_windows),
        Aggregation::hourly);
    add_naive(c, p_high, l1, t_windows);
    add_naive(c, p_low, l2, c_windows);
    c.normalization_cell = on(l2, 0, c_windows);
  } else {
    for (int link : plan.links) {
      for (std::size_t k = 0; k < n; ++k) {
        const double start = static_cast<double>(k) * interval_length_s;
        const double end = std::min(frame.horizon_s, start + interval_length_s);
        const double p = plan.interval_treated[k] ? within_alloc : 1.0 - within_alloc;
        plan.segments.push_back({link, start, end, p, "i" + std::to_string(k)});
      }
    }
    add(c, Estimand::tte(), on(std::nullopt, 1, t_windows), on(std::nullopt, 0, c_windows),
        Aggregation::hourly);
    if (within_alloc < 1.0) {
      add(c, Estimand::spillover(within_alloc), on(std::nullopt, 0, t_windows),
          on(std::nullopt, 0, c_windows), Aggregation::hourly);
    } else {
      disable(c, Estimand::spillover(within_alloc), "no control sessions in treatment intervals");
    }
    add_naive(c, within_alloc, std::nullopt, t_windows);
    add_naive(c, 1.0 - within_alloc, std::nullopt, c_windows);
    c.normalization_cell = on(std::nullopt, 0, c_windows);
  }
  plan.validate();
  return d;
}

PlannedDesign plan_event_study(double change_time_s, double pre_alloc, double post_alloc,
                               const PlanFrame& frame, DesignSource source, double p_high,
                               double p_low) {
  check_frame(frame);
  require(std::isfinite(change_time_s) && change_time_s >= kDay &&
              frame.horizon_s - change_time_s >= kDay,
          "event-study change_time " + fmt(change_time_s) +
              " must leave at least one full day on each side");
  require(is_probability(pre_alloc) && is_probability(post_alloc),
          "event-study allocations must lie in [0, 1]");

  PlannedDesign d{base_plan(DesignKind::event_study, frame, frame.seed), {}};
  auto& plan = d.plan;
  plan.source = source;
  plan.change_time_s = change_time_s;
  plan.pre_alloc = pre_alloc;
  plan.post_alloc = post_alloc;
  if (source == DesignSource::direct && pre_alloc == post_alloc) {
    plan.warnings.push_back("pre_alloc equals post_alloc; the contrast degenerates to a naive A/B test");
  }
  const auto& mult = frame.daily_demand_multipliers;
  if (!mult.empty()) {
    const auto split = static_cast<std::size_t>(std::floor(change_time_s / kDay));
    const auto days = static_cast<std::size_t>(std::ceil(frame.horizon_s / kDay));
    const double pre = mean_multiplier(mult, 0, split);
    const double post = mean_multiplier(mult, split, days);
    if (std::abs(pre - post) > 1e-9 * std::max(pre, post)) {
      plan.warnings.push_back("demand differs across the change point (mean day multiplier " +
                              fmt(pre) + " before, " + fmt(post) +
                              " after); estimates may absorb seasonality");
    }
  }

  const std::vector<TimeWindow> before{{0.0, change_time_s}};
  const std::vector<TimeWindow> after{{change_time_s, frame.horizon_s}};
  auto& c = d.cells;
  if (source == DesignSource::paired_link) {
    paired_segments(plan, p_high, p_low);
    const int l1 = frame.links[0], l2 = frame.links[1];
    add(c, Estimand::tte(), on(l1, 1, after), on(l2, 0, before), Aggregation::hourly);
    add(c, Estimand::spillover(p_high), on(l1, 0, after), on(l2, 0, before), Aggregation::hourly);
    add_naive(c, p_high, l1, after);
    add_naive(c, p_low, l2, before);
    c.normalization_cell = on(l2, 0, before);
  } else {
    for (int link : plan.links) {
      plan.segments.push_back({link, 0.0, change_time_s, pre_alloc, "pre"});
      plan.segments.push_back({link, change_time_s, frame.horizon_s, post_alloc, "post"});
    }
    if (post_alloc > 0.0 && pre_alloc < 1.0) {
      add(c, Estimand::tte(), on(std::nullopt, 1, after), on(std::nullopt, 0, before),
          Aggregation::hourly);
    } else {
      disable(c, Estimand::tte(), "no treated sessions after or no control sessions before");
    }
    if (post_alloc < 1.0 && pre_alloc < 1.0) {
      add(c, Estimand::spillover(post_alloc), on(std::nullopt, 0, after),
          on(std::nullopt, 0, before), Aggregation::hourly);
    } else {
      disable(c, Estimand::spillover(post_alloc), "only defined for p < 1");
    }
    add_naive(c, post_alloc, std::nullopt, after);
    if (pre_alloc != post_alloc) add_naive(c, pre_alloc, std::nullopt, before);
    if (pre_alloc < 1.0) c.normalization_cell = on(std::nullopt, 0, before);
  }
  plan.validate();
  return d;
}

PlannedDesign plan_gradual(std::span<const Phase> schedule, const PlanFrame& frame,
                           AssignmentMode mode) {
  check_frame(frame);
  require(!schedule.empty(), "gradual schedule is empty");
  require(schedule.front().start_time_s == 0.0, "gradual schedule must start at t=0");
  require(schedule.back().p == 1.0, "gradual schedule must end at p=1");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    require(is_probability(schedule[i].p), "gradual phase " + std::to_string(i) +
                                               ": allocation outside [0, 1]");
    require(schedule[i].start_time_s < frame.horizon_s,
            "gradual phase " + std::to_string(i) + " starts after the horizon");
    if (i > 0) {
      require(schedule[i].start_time_s > schedule[i - 1].start_time_s,
              "gradual phase start times must increase");
      require(schedule[i].p >= schedule[i - 1].p, "gradual schedule is not monotone at phase " +
                                                      std::to_string(i));
    }
  }

  PlannedDesign d{base_plan(DesignKind::gradual, frame, frame.seed), {}};
  auto& plan = d.plan;
  plan.assignment = mode;
  plan.schedule.assign(schedule.begin(), schedule.end());
  std::vector<std::vector<TimeWindow>> windows;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double end = i + 1 < schedule.size() ? schedule[i + 1].start_time_s : frame.horizon_s;
    windows.push_back({{schedule[i].start_time_s, end}});
    for (int link : plan.links) {
      plan.segments.push_back(
          {link, schedule[i].start_time_s, end, schedule[i].p, "ph" + std::to_string(i)});
    }
  }

  auto& c = d.cells;
  const double p0 = schedule.front().p;
  if (schedule.size() == 1 || p0 >= 1.0) {
    c.disabled.push_back("all contrasts: only mu_T(1) is observable");
    plan.validate();
    return d;
  }
  const auto base = on(std::nullopt, 0, windows.front());
  c.normalization_cell = base;
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    const double p = schedule[i].p;
    const auto& w = windows[i];
    add_naive(c, p, std::nullopt, w);
    if (p < 1.0) {
      add(c, Estimand::spillover(p), on(std::nullopt, 0, w), base, Aggregation::hourly);
      add(c, Estimand::partial(p), on(std::nullopt, 1, w), base, Aggregation::hourly);
    } else {
      disable(c, Estimand::spillover(p), "only defined for p < 1");
    }
  }
  add(c, Estimand::tte(), on(std::nullopt, 1, windows.back()), base, Aggregation::hourly);
  plan.validate();
  return d;
}

PlannedDesign plan_aa(const PlanFrame& frame) {
  check_frame(frame);
  PlannedDesign d{base_plan(DesignKind::aa, frame, frame.seed), {}};
  uniform_segments(d.plan, 0.0);
  auto& c = d.cells;
  if (frame.links.size() >= 2) {
    add(c, Estimand::tte(), on(frame.links[0], std::nullopt), on(frame.links[1], std::nullopt),
        Aggregation::hourly);
    c.normalization_cell = on(frame.links[1], std::nullopt);
  } else {
    std::vector<TimeWindow> even, odd;
    for (double s = 0.0; s < frame.horizon_s; s += kDay) {
      (static_cast<long long>(s / kDay) % 2 == 0 ? even : odd)
          .push_back({s, std::min(frame.horizon_s, s + kDay)});
    }
    if (odd.empty()) {
      c.disabled.push_back("tte: a single-link A/A needs at least two days");
    } else {
      add(c, Estimand::tte(), on(std::nullopt, std::nullopt, even),
          on(std::nullopt, std::nullopt, odd), Aggregation::hourly);
      c.normalization_cell = on(std::nullopt, std::nullopt, odd);
    }
  }
  d.plan.validate();
  return d;
}

PlannedDesign build_design(const DesignConfig& config, const PlanFrame& frame) {
  PlanFrame f = frame;
  if (config.seed) f.seed = *config.seed;
  switch (config.kind) {
    case DesignKind::ab:
      return plan_ab(config.p, f, config.assignment);
    case DesignKind::paired_link:
      return plan_paired_link(config.p_high, config.p_low, f);
    case DesignKind::switchback:
      return plan_switchback(config.interval_length_s, config.within_alloc, f, config.labeling,
                             config.burn_in_s, config.source, config.p_high, config.p_low);
    case DesignKind::event_study:
      require(config.change_time_s.has_value(), "event_study needs change_time_s");
      return plan_event_study(*config.change_time_s, config.pre_alloc, config.post_alloc, f,
                              config.source, config.p_high, config.p_low);
    case DesignKind::gradual:
      return plan_gradual(config.schedule, f, config.assignment);
    case DesignKind::aa:
      return plan_aa(f);
  }
  fail(ErrorCode::invalid_design, "unknown design kind");
}

}  // namespace netexp::designs
