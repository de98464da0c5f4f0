#include "netexp/io/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "json.hpp"
#include "netexp/analysis/normalize.hpp"
#include "netexp/causal/estimators.hpp"
#include "netexp/core/error.hpp"
#include "netexp/io/config.hpp"
#include "netexp/io/csv.hpp"

namespace netexp::io {

namespace {

struct CellStats {
  std::size_t n = 0;
  MetricValues sum;

  void add(const SessionRecord& r) {
    ++n;
    for (Metric m : kAllMetrics) sum[m] += r.value(m);
  }
  MetricValues mean() const {
    MetricValues out;
    for (Metric m : kAllMetrics) out[m] = n ? sum[m] / static_cast<double>(n) : 0.0;
    return out;
  }
};

sim::ScenarioConfig with_ab(const sim::ScenarioConfig& config, double p) {
  auto c = config;
  c.design.kind = designs::DesignKind::ab;
  c.design.p = p;
  return c;
}

void write_metric_header(std::ostream& os) {
  for (Metric m : kAllMetrics) os << ',' << to_string(m);
}

void write_metric_values(std::ostream& os, const MetricValues& v) {
  for (Metric m : kAllMetrics) os << ',' << format_number(v[m]);
}

}  // namespace

std::string Provenance::line() const { return provenance_line(config_hash, seed); }

Provenance provenance_of(const sim::ScenarioConfig& config, std::uint64_t seed) {
  return {hash_hex(config_hash(config)), seed};
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// --- simulate ---------------------------------------------------------------

SimulateOutput cmd_simulate(const sim::ScenarioConfig& config, std::uint64_t seed,
                            const std::filesystem::path& out) {
  SimulateOutput o;
  o.provenance = provenance_of(config, seed);
  const auto planned = config.plan(seed);
  o.plan_warnings = planned.plan.warnings;
  o.result = sim::run_scenario(config, planned.plan, seed);
  for (const auto& r : o.result.log) ++o.sessions_per_cell[r.cell];
  if (!out.empty()) {
    save_session_log(out, o.result.log);
    nlohmann::ordered_json meta;
    meta["config_hash"] = o.provenance.config_hash;
    meta["seed"] = seed;
    meta["sessions"] = o.result.log.size();
    auto meta_path = out;
    meta_path += ".meta.json";
    std::ofstream m(meta_path);
    if (!m) fail(ErrorCode::io, "cannot write " + meta_path.string());
    m << meta.dump(2) << '\n';
  }
  return o;
}

void print_summary(std::ostream& os, const SimulateOutput& o) {
  os << o.provenance.line() << '\n';
  os << "sessions: " << o.result.log.size() << '\n';
  for (const auto& [cell, n] : o.sessions_per_cell) os << "  " << cell << ": " << n << '\n';
  for (const auto& t : o.result.links) {
    os << "link " << t.link_id << ": " << t.congested_hours() << " congested hours of "
       << t.hours.size() << '\n';
  }
  for (const auto& w : o.plan_warnings) os << "warning: " << w << '\n';
}

// --- analyze ----------------------------------------------------------------

std::vector<HourlySeriesRow> hourly_series(const SessionLog& log) {
  std::map<std::tuple<int, std::int64_t, int>, CellStats> cells;
  for (const auto& r : log) cells[{r.link_id, r.hour_index(), r.treatment}].add(r);
  std::vector<HourlySeriesRow> rows;
  rows.reserve(cells.size());
  for (const auto& [key, stats] : cells) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), stats.n, stats.mean()});
  }
  return rows;
}

ReportBundle cmd_analyze(const SessionLog& log, const sim::ScenarioConfig& config,
                         std::uint64_t seed) {
  if (log.empty()) fail(ErrorCode::empty_log, "session log is empty");
  ReportBundle b;
  b.provenance = provenance_of(config, seed);
  const auto planned = config.plan(seed);
  b.notes = planned.plan.warnings;
  for (const auto& d : planned.cells.disabled) b.notes.push_back("disabled " + d);
  b.estimates = designs::estimate_all(log, planned.cells, config.metrics);
  b.hourly = hourly_series(log);
  return b;
}

void write_hourly_series(std::ostream& os, const std::vector<HourlySeriesRow>& rows,
                         const Provenance& provenance) {
  os << provenance.line() << '\n' << "link_id,hour_index,treatment,sessions";
  write_metric_header(os);
  os << '\n';
  for (const auto& r : rows) {
    os << r.link_id << ',' << r.hour_index << ',' << r.treatment << ',' << r.sessions;
    write_metric_values(os, r.mean);
    os << '\n';
  }
}

// --- sweep ------------------------------------------------------------------

std::optional<SweepRow> SweepReport::row(double p, int treatment) const {
  for (const auto& r : rows) {
    if (r.p == p && r.treatment == treatment) return r;
  }
  return std::nullopt;
}

SweepReport cmd_sweep(const sim::ScenarioConfig& config, std::vector<double> allocations,
                      std::uint64_t seed) {
  std::set<double> distinct;
  for (double p : allocations) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::invalid_allocation, "sweep allocation " + format_number(p) + " outside [0, 1]");
    }
    distinct.insert(p);
  }
  if (distinct.size() < 2) fail(ErrorCode::insufficient_sweep, "sweep needs at least 2 allocations");
  distinct.insert(0.0);
  distinct.insert(1.0);
  const std::vector<double> ps(distinct.begin(), distinct.end());

  std::vector<SessionLog> logs(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    logs[i] = sim::run_scenario(with_ab(config, ps[i]), seed).log;
  });

  SweepReport rep;
  rep.provenance = provenance_of(config, seed);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CellStats t, c;
    for (const auto& r : logs[i]) (r.treated() ? t : c).add(r);
    if (c.n) rep.rows.push_back({ps[i], 0, c.n, c.mean()});
    if (t.n) rep.rows.push_back({ps[i], 1, t.n, t.mean()});
  }

  const auto& log0 = logs.front();
  const auto& log1 = logs.back();
  const auto control0 = causal::refs(log0);
  const auto treated1 = causal::refs(log1);

  for (Metric m : config.metrics) {
    const double base = causal::group_mean(control0, m);
    auto scaled = [&](Estimate e) { return base > 0.0 ? analysis::normalize(e, base) : e; };
    std::vector<causal::SweepPoint> points;
    for (std::size_t i = 1; i + 1 < ps.size(); ++i) {
      const double p = ps[i];
      causal::RecordRefs treated, control;
      for (const auto& r : logs[i]) (r.treated() ? treated : control).push_back(&r);
      causal::SweepPoint pt;
      pt.p = p;
      if (!treated.empty() && !control.empty()) {
        pt.tau = scaled(causal::naive_ate(std::span<const SessionRecord>(logs[i]), m, p));
        pt.spillover = scaled(causal::spillover_estimate(control, control0, m, p));
        pt.partial = scaled(causal::partial_effect(treated, control0, m, p));
        for (const auto* e : {&*pt.tau, &*pt.spillover, &*pt.partial}) rep.estimates.push_back(*e);
      }
      points.push_back(pt);
    }
    const Estimate tte = scaled(causal::tte_estimate(treated1, control0, m));
    rep.estimates.push_back(tte);
    std::vector<causal::SweepPoint> usable;
    for (const auto& pt : points) {
      if (pt.tau) usable.push_back(pt);
    }
    if (usable.size() >= 2) rep.diagnostics.push_back(causal::sutva_diagnostic(usable, tte));
  }
  return rep;
}

void write_sweep_table(std::ostream& os, const SweepReport& report) {
  os << report.provenance.line() << '\n' << "p,treatment,sessions";
  write_metric_header(os);
  os << '\n';
  for (const auto& r : report.rows) {
    os << format_number(r.p) << ',' << r.treatment << ',' << r.sessions;
    write_metric_values(os, r.mean);
    os << '\n';
  }
}

void write_diagnostics(std::ostream& os, const SweepReport& report) {
  os << report.provenance.line() << '\n'
     << "metric,condition,p_i,p_j,difference,z,p_value,reject,reject_bonferroni\n";
  for (const auto& d : report.diagnostics) {
    for (const auto& t : d.tests) {
      os << to_string(d.metric) << ',' << causal::to_string(t.condition) << ','
         << format_number(t.p_i) << ',' << (t.p_j ? format_number(*t.p_j) : "") << ','
         << format_number(t.difference) << ',' << format_number(t.z) << ','
         << format_number(t.p_value) << ',' << t.reject << ',' << t.reject_bonferroni << '\n';
    }
  }
}

// --- replicate --------------------------------------------------------------

const ReplicateRow* ReplicateReport::find(const Estimand& e, Metric m) const {
  for (const auto& r : rows) {
    if (r.estimand == e && r.metric == m) return &r;
  }
  return nullptr;
}

ReplicateReport cmd_replicate(const sim::ScenarioConfig& config, int replications,
                              std::uint64_t seed) {
  if (replications < 2) fail(ErrorCode::config, "replicate needs at least 2 replications");
  const auto n = static_cast<std::size_t>(replications);
  std::vector<std::vector<Estimate>> estimates(n);
  std::vector<std::vector<double>> differences(n);  // pooled cell-mean differences
  std::vector<std::vector<double>> scales(n);       // outcome magnitude, for the coverage tolerance

  parallel_for(n, [&](std::size_t r) {
    const std::uint64_t s = seed + r;
    const auto planned = config.plan(s);
    const auto log = sim::run_scenario(config, planned.plan, s).log;
    estimates[r] = designs::estimate_all(log, planned.cells, config.metrics);
    for (const auto& e : planned.cells.entries) {
      for (Metric m : config.metrics) {
        CellStats num, den;
        for (const auto& rec : log) {
          if (e.numerator.matches(rec)) num.add(rec);
          else if (e.denominator.matches(rec)) den.add(rec);
        }
        differences[r].push_back(num.mean()[m] - den.mean()[m]);
        scales[r].push_back(std::max(std::abs(num.mean()[m]), std::abs(den.mean()[m])));
      }
    }
  });

  ReplicateReport rep;
  rep.provenance = provenance_of(config, seed);
  const std::size_t k = estimates.front().size();
  const bool inert = config.treatment.kind == sim::TreatmentKind::inert;
  for (std::size_t j = 0; j < k; ++j) {
    ReplicateRow row;
    const Estimate& first = estimates.front()[j];
    row.estimand = first.estimand;
    row.metric = first.metric;
    row.aggregation = first.aggregation;
    row.replications = replications;
    double sum = 0.0, truth = 0.0, width = 0.0, scale = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      scale = std::max(scale, scales[r][j]);
      sum += estimates[r][j].point;
      truth += differences[r][j];
      width += estimates[r][j].ci95_hi - estimates[r][j].ci95_lo;
    }
    row.mean = sum / static_cast<double>(n);
    row.truth = inert ? 0.0 : truth / static_cast<double>(n);
    row.mean_ci_width = width / static_cast<double>(n);
    double ss = 0.0;
    int covered = 0, positive = 0;
    const double tol = 1e-9 * std::max(scale, std::abs(row.truth));
    for (std::size_t r = 0; r < n; ++r) {
      const auto& e = estimates[r][j];
      ss += (e.point - row.mean) * (e.point - row.mean);
      covered += (e.ci95_lo - tol <= row.truth && row.truth <= e.ci95_hi + tol) ? 1 : 0;
      positive += e.point > 0.0 ? 1 : 0;
    }
    row.sd = std::sqrt(ss / static_cast<double>(n - 1));
    row.mc_se = row.sd / std::sqrt(static_cast<double>(n));
    row.bias_z = row.mc_se > 0.0 ? (row.mean - row.truth) / row.mc_se
                                 : (std::abs(row.mean - row.truth) <= tol ? 0.0 : INFINITY);
    row.coverage = static_cast<double>(covered) / static_cast<double>(n);
    row.positive_fraction = static_cast<double>(positive) / static_cast<double>(n);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_replicate(std::ostream& os, const ReplicateReport& report) {
  os << report.provenance.line() << '\n'
     << "estimand,metric,aggregation,replications,mean,sd,mc_se,truth,bias_z,coverage,"
        "positive_fraction,mean_ci_width\n";
  for (const auto& r : report.rows) {
    os << r.estimand.label() << ',' << to_string(r.metric) << ',' << to_string(r.aggregation)
       << ',' << r.replications << ',' << format_number(r.mean) << ',' << format_number(r.sd)
       << ',' << format_number(r.mc_se) << ',' << format_number(r.truth) << ','
       << format_number(r.bias_z) << ',' << format_number(r.coverage) << ','
       << format_number(r.positive_fraction) << ',' << format_number(r.mean_ci_width) << '\n';
  }
}

// --- calibrate --------------------------------------------------------------

const CalibrationVerdict* CalibrationReport::verdict(const std::string& design) const {
  for (const auto& v : verdicts) {
    if (v.design == design) return &v;
  }
  return nullptr;
}

CalibrationReport cmd_calibrate(const sim::ScenarioConfig& baseline,
                                const std::vector<CalibrationCandidate>& candidates,
                                std::uint64_t seed, double alpha) {
  if (baseline.treatment.kind != sim::TreatmentKind::inert) {
    fail(ErrorCode::calibration, "calibration baseline must use an inert treatment, found " +
                                     std::string(sim::to_string(baseline.treatment.kind)));
  }
  if (candidates.empty()) fail(ErrorCode::calibration, "no candidate designs to calibrate");
  const auto frame = baseline.frame(seed);
  const auto aa = designs::plan_aa(frame);
  const auto log = sim::run_scenario(baseline, aa.plan, seed).log;

  CalibrationReport rep;
  rep.provenance = provenance_of(baseline, seed);
  rep.alpha = alpha;
  for (const auto& cand : candidates) {
    const auto planned = designs::build_design(cand.design, frame);
    designs::CellMap cells = designs::as_aa(planned.cells);
    std::erase_if(cells.entries,
                  [](const auto& e) { return e.estimand.kind != EstimandKind::tte; });
    if (cells.entries.empty()) {
      fail(ErrorCode::calibration, cand.name + ": design has no TTE contrast to calibrate");
    }
    const auto est = designs::estimate_all(log, cells, baseline.metrics);
    CalibrationVerdict v;
    v.design = cand.name;
    v.warnings = planned.plan.warnings;
    const double corrected = alpha / static_cast<double>(est.size());
    for (const auto& e : est) {
      CalibrationRow row;
      row.design = cand.name;
      row.estimate = e;
      row.p_value = causal::equality_p_value(e.point, e.std_error, 0.0, 0.0, &row.z);
      row.false_positive = row.p_value < alpha;
      row.false_positive_bonferroni = row.p_value < corrected;
      v.raw_false_positives += row.false_positive ? 1 : 0;
      v.flagged = v.flagged || row.false_positive_bonferroni;
      rep.rows.push_back(row);
    }
    rep.verdicts.push_back(v);
  }
  return rep;
}

void write_calibration(std::ostream& os, const CalibrationReport& report) {
  os << report.provenance.line() << '\n'
     << "design,estimand,metric,point,point_normalized,se,z,p_value,false_positive,"
        "false_positive_bonferroni\n";
  for (const auto& r : report.rows) {
    const auto& e = r.estimate;
    os << r.design << ',' << e.estimand.label() << ',' << to_string(e.metric) << ','
       << format_number(e.point) << ','
       << (e.normalized ? format_number(e.normalized->point) : "") << ','
       << format_number(e.std_error) << ',' << format_number(r.z) << ','
       << format_number(r.p_value) << ',' << r.false_positive << ','
       << r.false_positive_bonferroni << '\n';
  }
}

}  // namespace netexp::io
