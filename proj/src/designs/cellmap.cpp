#include <algorithm>
#include <cmath>
#include <sstream>

#include "netexp/designs/plan.hpp"

namespace netexp::designs {

bool CellPredicate::matches(const SessionRecord& r) const {
  if (link_id && r.link_id != *link_id) return false;
  if (treatment && r.treatment != *treatment) return false;
  if (windows.empty()) return true;
  return std::any_of(windows.begin(), windows.end(),
                     [&](const TimeWindow& w) { return w.contains(r.start_time); });
}

bool CellPredicate::disjoint_from(const CellPredicate& other) const {
  if (link_id && other.link_id && *link_id != *other.link_id) return true;
  if (treatment && other.treatment && *treatment != *other.treatment) return true;
  if (windows.empty() || other.windows.empty()) return false;
  for (const auto& a : windows) {
    for (const auto& b : other.windows) {
      if (a.start_s < b.end_s && b.start_s < a.end_s) return false;
    }
  }
  return true;
}

std::string CellPredicate::describe() const {
  std::ostringstream os;
  os << "link=" << (link_id ? std::to_string(*link_id) : "*")
     << " treatment=" << (treatment ? std::to_string(*treatment) : "*");
  if (!windows.empty()) {
    os << " t in ";
    for (std::size_t i = 0; i < windows.size(); ++i) {
      os << (i ? "," : "") << '[' << windows[i].start_s << ',' << windows[i].end_s << ')';
    }
  }
  return os.str();
}

CellMap as_aa(const CellMap& cells) {
  CellMap out;
  auto strip = [](CellPredicate p) {
    p.treatment.reset();
    return p;
  };
  for (const auto& e : cells.entries) {
    EstimandSpec s{e.estimand, strip(e.numerator), strip(e.denominator), e.analysis};
    if (s.numerator.disjoint_from(s.denominator)) {
      out.entries.push_back(std::move(s));
    } else {
      out.disabled.push_back(e.estimand.label() + ": arms coincide without treatment labels");
    }
  }
  if (cells.normalization_cell) out.normalization_cell = strip(*cells.normalization_cell);
  out.disabled.insert(out.disabled.end(), cells.disabled.begin(), cells.disabled.end());
  return out;
}

std::vector<std::int64_t> carryover_sessions(std::span<const SessionRecord> log,
                                             const DesignPlan& plan, double session_duration_s) {
  std::vector<double> boundaries;
  if (plan.kind == DesignKind::switchback && plan.interval_length_s > 0) {
    for (double b = plan.interval_length_s; b < plan.horizon_s; b += plan.interval_length_s) {
      boundaries.push_back(b);
    }
  } else if (plan.kind == DesignKind::event_study && plan.change_time_s) {
    boundaries.push_back(*plan.change_time_s);
  } else if (plan.kind == DesignKind::gradual) {
    for (std::size_t i = 1; i < plan.schedule.size(); ++i) {
      boundaries.push_back(plan.schedule[i].start_time_s);
    }
  }
  std::vector<std::int64_t> out;
  for (const auto& r : log) {
    const double end = r.start_time + session_duration_s;
    const bool crosses = std::any_of(boundaries.begin(), boundaries.end(), [&](double b) {
      return r.start_time < b && b < end;
    });
    if (crosses) out.push_back(r.session_id);
  }
  return out;
}

}  // namespace netexp::designs
