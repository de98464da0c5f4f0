// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netexp/analysis/regression.hpp"
#include "netexp/designs/plan.hpp"
#include "netexp/io/commands.hpp"
#include "netexp/io/config.hpp"
#include "netexp/io/csv.hpp"
#include "netexp/sim/scenario.hpp"
#include "netexp/sim/share.hpp"
#include "netexp/sim/step.hpp"
#include "oracles.hpp"

using namespace netexp;

namespace {

// Tolerances.
constexpr double kRatioTol = 0.01;
constexpr double kTteFlatTol = 0.01;
constexpr double kRetransTte = 2.0;
constexpr double kRetransTol = 0.10;
constexpr double kSpilloverTol = 0.01;
constexpr double kPureGapTol = 0.01;
constexpr double kMinRttSlack = 1e-9;
constexpr double kBitrateRelTol = 0.20;
constexpr double kOracleTol = 1e-10;
constexpr double kCoverageMin = 0.93;
constexpr double kBiasZMax = 3.0;
constexpr double kShareTol = 1e-9;
constexpr int kReplications = 200;
constexpr int kShareInstances = 1000;
constexpr double kBudgetTest1 = 30.0;
constexpr double kBudgetCapping = 120.0;
constexpr double kBudgetInvariants = 60.0;

const std::string kPresets = NETEXP_PRESET_DIR;
const std::vector<double> kSweep{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

sim::ScenarioConfig preset(const std::string& name) {
  return io::load_config(kPresets + "/" + name + ".json");
}

const Estimate* find(const std::vector<Estimate>& v, const std::string& label, Metric m) {
  for (const auto& e : v) {
    if (e.metric == m && e.estimand.label() == label) return &e;
  }
  return nullptr;
}

double norm_point(const Estimate& e) { return e.normalized ? e.normalized->point : e.point; }

// Normalized point of (label, metric), recording a failure when absent.
double point_of(Check& c, const std::vector<Estimate>& v, const std::string& label, Metric m) {
  const auto* e = find(v, label, m);
  if (e == nullptr) {
    c.expect(false, "missing " + label + " " + std::string(to_string(m)));
    return std::nan("");
  }
  return norm_point(*e);
}

double throughput_ratio(const io::SweepReport& r, double p) {
  const auto t = r.row(p, 1), c = r.row(p, 0);
  if (!t || !c) return std::nan("");
  return t->mean[Metric::avg_throughput] / c->mean[Metric::avg_throughput];
}

// Persistent backlogged apps: k of n at weight m leave each control flow
// C / (k m + n - k) against C / n when nobody is treated.
double control_spillover_oracle(int n, int k, double m) {
  return static_cast<double>(n) / (k * m + (n - k)) - 1.0;
}

Check criterion1() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = preset("test1_connections");
  const auto rep = io::cmd_sweep(cfg, kSweep, cfg.seed);
  const double secs = seconds_since(t0);
  for (double p : kSweep) {
    const double r = throughput_ratio(rep, p);
    c.expect(std::abs(r - cfg.treatment.multiplier) <= kRatioTol,
             "ratio at p=" + num(p) + " is " + num(r));
  }
  const double tte = point_of(c, rep.estimates, "tte", Metric::avg_throughput);
  c.expect(std::abs(tte) < kTteFlatTol, "throughput TTE " + num(tte));
  const double rt = point_of(c, rep.estimates, "tte", Metric::retrans_frac);
  c.expect(std::abs(rt - kRetransTte) <= kRetransTol, "retrans TTE " + num(rt));
  const double sp = point_of(c, rep.estimates, "spillover(0.9)", Metric::avg_throughput);
  const double want = control_spillover_oracle(cfg.workload.persistent_apps, 9, cfg.treatment.multiplier);
  c.expect(std::abs(sp - want) <= kSpilloverTol, "spillover(0.9) " + num(sp) + " vs " + num(want));
  c.expect(secs < kBudgetTest1, "runtime " + num(secs) + " s");
  c.note("ratio(0.5)=" + num(throughput_ratio(rep, 0.5)) + " tte_thr=" + num(tte) +
         " tte_retrans=" + num(rt) + " spill(0.9)=" + num(sp) + " " + num(secs) + "s");
  return c;
}

Check criterion2() {
  Check c;
  const auto cfg = preset("test2_pacing");
  const auto rep = io::cmd_sweep(cfg, kSweep, cfg.seed);
  for (double p : kSweep) {
    const double r = throughput_ratio(rep, p);
    c.expect(std::abs(r - 0.5) <= kRatioTol, "ratio at p=" + num(p) + " is " + num(r));
    if (p >= 0.5) {
      const double sp = point_of(c, rep.estimates, "spillover(" + num(p) + ")", Metric::avg_throughput);
      c.expect(sp > 0.0, "spillover at p=" + num(p) + " is " + num(sp));
    }
  }
  const auto* tte = find(rep.estimates, "tte", Metric::avg_throughput);
  c.expect(tte != nullptr && tte->contains(0.0), "throughput TTE CI excludes 0");
  const double rt = point_of(c, rep.estimates, "tte", Metric::retrans_frac);
  c.expect(rt < 0.0, "retrans TTE " + num(rt));
  c.note("ratio(0.5)=" + num(throughput_ratio(rep, 0.5)) + " tte_retrans=" + num(rt));
  return c;
}

Check criterion3() {
  Check c;
  auto cfg = preset("test3_cc");
  std::vector<double> pure(2);
  for (int swap = 0; swap < 2; ++swap) {
    auto run = cfg;
    if (swap) std::swap(run.treatment.algorithm, run.treatment.control_algorithm);
    const auto rep = io::cmd_sweep(run, kSweep, run.seed);
    const double tau = point_of(c, rep.estimates, "ate(0.1)", Metric::avg_throughput);
    c.expect(tau > 0.0, "tau(0.1) with " + run.treatment.algorithm + " treated is " + num(tau));
    pure[swap] = rep.row(1.0, 1)->mean[Metric::avg_throughput];
    c.note(run.treatment.algorithm + " treated: tau(0.1)=" + num(tau));
  }
  const double gap = std::abs(pure[0] - pure[1]) / pure[1];
  c.expect(gap < kPureGapTol, "pure-allocation gap " + num(gap));
  c.note("pure gap=" + num(gap));
  return c;
}

struct CappingRun {
  sim::ScenarioConfig config;
  io::SimulateOutput sim;
  io::ReportBundle report;
  double seconds = 0.0;
};

CappingRun run_capping(const std::string& name) {
  CappingRun r;
  const auto t0 = std::chrono::steady_clock::now();
  r.config = preset(name);
  r.sim = io::cmd_simulate(r.config, r.config.seed);
  r.report = io::cmd_analyze(r.sim.result.log, r.config, r.config.seed);
  r.seconds = seconds_since(t0);
  return r;
}

Check criterion4(const CappingRun& run) {
  Check c;
  const auto& est = run.report.estimates;
  using M = Metric;
  for (const char* l : {"ate(0.05)", "ate(0.95)"}) {
    const double v = point_of(c, est, l, M::avg_throughput);
    c.expect(v <= 0.0, std::string("throughput ") + l + " " + num(v));
    const double r = point_of(c, est, l, M::min_rtt);
    c.expect(r >= -kMinRttSlack, std::string("min_rtt ") + l + " " + num(r));
  }
  for (const char* l : {"tte", "spillover(0.95)"}) {
    const double v = point_of(c, est, l, M::avg_throughput);
    c.expect(v > 0.0, std::string("throughput ") + l + " " + num(v));
    const double r = point_of(c, est, l, M::min_rtt);
    c.expect(r < 0.0, std::string("min_rtt ") + l + " " + num(r));
  }
  const auto& w = run.config.workload;
  const double uncapped = sim::choose_bitrate(w.access_rate_bps, w);
  const double capped = sim::choose_bitrate(w.access_rate_bps, w, run.config.treatment.cap_bps);
  const double reduction = 1.0 - capped / uncapped;
  const double br = point_of(c, est, "tte", M::bitrate);
  c.expect(br < 0.0 && std::abs(-br - reduction) <= kBitrateRelTol * reduction,
           "bitrate TTE " + num(br) + " vs configured reduction " + num(reduction));

  const auto& links = run.sim.result.links;
  c.expect(links.size() == 2, "expected two links");
  if (links.size() == 2) {
    c.expect(links[0].congested_hours() < links[1].congested_hours(),
             "congested hours " + std::to_string(links[0].congested_hours()) + " vs " +
                 std::to_string(links[1].congested_hours()));
  }
  const auto sessions = run.sim.result.log.size();
  c.expect(w.n_days == 5, "preset should span 5 days");
  c.expect(sessions >= 10000, "only " + std::to_string(sessions) + " sessions");
  c.expect(run.seconds < kBudgetCapping, "runtime " + num(run.seconds) + " s");
  c.note("thr tte=" + num(point_of(c, est, "tte", M::avg_throughput)) +
         " spill=" + num(point_of(c, est, "spillover(0.95)", M::avg_throughput)) +
         " rtt tte=" + num(point_of(c, est, "tte", M::min_rtt)) + " bitrate tte=" + num(br) +
         " sessions=" + std::to_string(sessions) + " congested hours " +
         std::to_string(links.empty() ? 0 : links[0].congested_hours()) + "/" +
         std::to_string(links.size() < 2 ? 0 : links[1].congested_hours()) + " " +
         num(run.seconds) + "s");
  return c;
}

Check criterion5(const CappingRun& paired) {
  Check c;
  const auto sb = run_capping("capping_switchback");
  for (Metric m : paired.config.metrics) {
    const auto* p = find(paired.report.estimates, "tte", m);
    const auto* s = find(sb.report.estimates, "tte", m);
    if (p == nullptr || s == nullptr) {
      c.expect(false, "missing tte for " + std::string(to_string(m)));
      continue;
    }
    c.expect(s->contains(p->point), std::string(to_string(m)) + ": switchback CI [" +
                                        num(s->ci95_lo) + ", " + num(s->ci95_hi) +
                                        "] misses " + num(p->point));
  }

  const auto baseline = preset("aa_baseline");
  const auto es = preset("capping_event_study");
  const std::vector<io::CalibrationCandidate> candidates{{"switchback", sb.config.design},
                                                         {"event_study", es.design}};
  const auto cal = io::cmd_calibrate(baseline, candidates, baseline.seed);
  const auto* vs = cal.verdict("switchback");
  const auto* ve = cal.verdict("event_study");
  c.expect(vs != nullptr && !vs->flagged, "switchback flagged by calibration");
  c.expect(ve != nullptr && ve->flagged, "event study not flagged by calibration");
  if (vs && ve) {
    c.note("calibration raw rejections: switchback " + std::to_string(vs->raw_false_positives) +
           ", event study " + std::to_string(ve->raw_false_positives));
  }
  return c;
}

analysis::HourlyPanel panel_of(std::initializer_list<analysis::PanelRow> rows) {
  analysis::HourlyPanel p;
  p.rows = rows;
  return p;
}

oracle::Mat design_of(const analysis::HourlyPanel& p, const std::vector<int>& dummy_hours) {
  oracle::Mat x;
  for (const auto& r : p.rows) {
    oracle::Vec row{1.0, static_cast<double>(r.condition)};
    for (int h : dummy_hours) row.push_back(r.hour_of_day == h ? 1.0 : 0.0);
    x.push_back(row);
  }
  return x;
}

oracle::Vec response_of(const analysis::HourlyPanel& p) {
  oracle::Vec y;
  for (const auto& r : p.rows) y.push_back(r.z);
  return y;
}

double max_gap(const Eigen::VectorXd& a, const oracle::Vec& b) {
  double g = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) g = std::max(g, std::abs(a[static_cast<Eigen::Index>(k)] - b[k]));
  return g;
}

double max_gap(const std::vector<double>& a, const oracle::Vec& b) {
  double g = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) g = std::max(g, std::abs(a[k] - b[k]));
  return g;
}

Check criterion6() {
  Check c;
  using analysis::ols_fixed_effects;
  using analysis::newey_west_se;

  const auto six = panel_of({{0, 0, 0, 1.0, 5}, {0, 0, 1, 2.5, 5}, {1, 1, 0, 3.0, 5},
                             {1, 1, 1, 4.0, 5}, {24, 0, 0, 2.0, 5}, {24, 0, 1, 3.5, 5}});
  {
    const auto x = design_of(six, {1});
    const auto y = response_of(six);
    oracle::Mat xtx(3, oracle::Vec(3, 0.0));
    oracle::Vec xty(3, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int a = 0; a < 3; ++a) {
        xty[a] += x[i][a] * y[i];
        for (int b = 0; b < 3; ++b) xtx[a][b] += x[i][a] * x[i][b];
      }
    const double g = max_gap(ols_fixed_effects(six).coefficients, oracle::cramer3(xtx, xty));
    c.expect(g <= kOracleTol, "OLS gap " + num(g));
    c.note("ols gap=" + num(g));
  }

  const auto eight0 = panel_of({{0, 0, 0, 1.0, 1}, {0, 0, 1, 2.2, 1}, {1, 1, 0, 2.9, 1},
                                {1, 1, 1, 4.4, 1}, {2, 2, 0, 0.7, 1}, {2, 2, 1, 1.1, 1},
                                {26, 2, 0, 1.3, 1}, {26, 2, 1, 2.6, 1}});
  {
    const auto hac = newey_west_se(ols_fixed_effects(eight0), 0);
    const double g = max_gap(hac.standard_errors,
                             oracle::white_sandwich(design_of(eight0, {1, 2}), response_of(eight0)));
    c.expect(g <= kOracleTol, "NW(0) vs sandwich gap " + num(g));
    c.note("nw0 gap=" + num(g));
  }

  const auto eight2 = panel_of({{0, 0, 0, 1.00, 3}, {0, 0, 1, 1.90, 3}, {1, 1, 0, 2.45, 3},
                                {1, 1, 1, 3.10, 3}, {24, 0, 0, 1.37, 3}, {24, 0, 1, 2.60, 3},
                                {25, 1, 0, 2.05, 3}, {25, 1, 1, 3.42, 3}});
  {
    const auto hac = newey_west_se(ols_fixed_effects(eight2), 2);
    const double g =
        max_gap(hac.standard_errors, oracle::newey_west(design_of(eight2, {1}), response_of(eight2), 2));
    c.expect(g <= kOracleTol, "NW(2) gap " + num(g));
    c.note("nw2 gap=" + num(g));
  }

  {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    analysis::HourlyPanel p;
    double diff = 0.0;
    for (int t = 0; t < 72; ++t) {
      const double ctl = 10 + std::sin(t / 3.0) + noise(rng);
      const double trt = ctl + 0.7 + noise(rng);
      p.rows.push_back({t, t % 24, 0, ctl, 10});
      p.rows.push_back({t, t % 24, 1, trt, 10});
      diff += trt - ctl;
    }
    const double g = std::abs(ols_fixed_effects(p).treatment_effect() - diff / 72.0);
    c.expect(g <= kOracleTol, "balanced-panel identity gap " + num(g));
  }
  return c;
}

Check criterion7(const CappingRun& capping) {
  Check c;
  const auto cfg = preset("sutva_ab");
  const auto rep = io::cmd_replicate(cfg, kReplications, cfg.seed);
  const auto tau = Estimand::ate(cfg.design.p);
  for (Metric m : cfg.metrics) {
    const auto* row = rep.find(tau, m);
    if (row == nullptr) {
      c.expect(false, "missing replicate row for " + std::string(to_string(m)));
      continue;
    }
    const std::string name(to_string(m));
    c.expect(row->replications == kReplications, name + ": only " + std::to_string(row->replications) + " replications");
    c.expect(row->coverage >= kCoverageMin, name + " coverage " + num(row->coverage));
    c.expect(std::abs(row->bias_z) < kBiasZMax, name + " bias_z " + num(row->bias_z));
    c.note(name + " cov=" + num(row->coverage) + " bias_z=" + num(row->bias_z));
  }

  // Same contrasts on the same log, once per aggregation.
  auto planned = capping.config.plan(capping.config.seed);
  auto account = planned.cells, hourly = planned.cells;
  for (auto& e : account.entries) e.analysis = Aggregation::account;
  for (auto& e : hourly.entries) e.analysis = Aggregation::hourly;
  const auto& log = capping.sim.result.log;
  const auto ea = designs::estimate_all(log, account, capping.config.metrics);
  const auto eh = designs::estimate_all(log, hourly, capping.config.metrics);
  int compared = 0;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    const std::string label = ea[i].estimand.label();
    if (label != "tte" && label.rfind("spillover", 0) != 0) continue;
    const double wa = ea[i].ci95_hi - ea[i].ci95_lo;
    const double wh = eh[i].ci95_hi - eh[i].ci95_lo;
    c.expect(wa < wh, label + " " + std::string(to_string(ea[i].metric)) + ": account width " +
                          num(wa) + " not below hourly " + num(wh));
    ++compared;
  }
  c.expect(compared > 0, "no cross-cell contrasts to compare");
  c.note("aggregation widths compared on " + std::to_string(compared) + " contrasts");
  return c;
}

struct ShareInstance {
  std::vector<double> demands, weights;
  double capacity = 0.0;
};

ShareInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_flows(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ShareInstance in;
  in.capacity = 1.0 + 99.0 * unit(rng);
  const int n = n_flows(rng);
  for (int i = 0; i < n; ++i) {
    in.demands.push_back(unit(rng) < 0.25 ? sim::kUnbounded : in.capacity * 0.6 * unit(rng));
    in.weights.push_back(0.1 + 4.9 * unit(rng));
  }
  return in;
}

Check criterion8() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(8);
  int oracle_bad = 0, conservation_bad = 0, fairness_bad = 0, scale_bad = 0;
  for (int k = 0; k < kShareInstances; ++k) {
    auto in = random_instance(rng);
    const double tol = kShareTol * in.capacity;
    const auto a = sim::weighted_share(in.demands, in.weights, in.capacity);
    const auto want = oracle::water_fill(in.demands, in.weights, in.capacity);
    double total = 0.0, offered = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - want[i]) > tol) ++oracle_bad;
      total += a[i];
      offered += in.demands[i];
    }
    if (std::abs(total - std::min(offered, in.capacity)) > tol) ++conservation_bad;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) {
        const bool open_i = a[i] < in.demands[i] * (1 - 1e-9);
        const bool open_j = a[j] < in.demands[j] * (1 - 1e-9);
        if (open_i && open_j && std::abs(a[i] / in.weights[i] - a[j] / in.weights[j]) > tol) ++fairness_bad;
      }
    for (double& w : in.weights) w *= 3.5;
    const auto b = sim::weighted_share(in.demands, in.weights, in.capacity);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > tol) ++scale_bad;
  }
  c.expect(oracle_bad == 0, std::to_string(oracle_bad) + " flows differ from brute force");
  c.expect(conservation_bad == 0, std::to_string(conservation_bad) + " conservation failures");
  c.expect(fairness_bad == 0, std::to_string(fairness_bad) + " fairness failures");
  c.expect(scale_bad == 0, std::to_string(scale_bad) + " scale-invariance failures");

  const auto cfg = preset("test1_connections");
  std::string logs[2];
  for (auto& s : logs) {
    std::ostringstream os;
    io::write_session_log(os, sim::run_scenario(cfg, cfg.seed).log);
    s = os.str();
  }
  const auto h0 = std::hash<std::string>{}(logs[0]), h1 = std::hash<std::string>{}(logs[1]);
  c.expect(h0 == h1 && logs[0] == logs[1], "repeated runs differ");
  const double secs = seconds_since(t0);
  c.expect(secs < kBudgetInvariants, "runtime " + num(secs) + " s");
  c.note(std::to_string(kShareInstances) + " instances, log hash " + io::hash_hex(h0) + ", " +
         num(secs) + "s");
  return c;
}

bool report(int n, const std::string& title, const std::function<Check()>& run) {
  Check c;
  try {
    c = run();
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = c.failures.empty();
  std::printf("criterion %d %-34s %s", n, title.c_str(), ok ? "PASS" : "FAIL");
  std::string detail;
  for (const auto& s : ok ? c.notes : c.failures) detail += (detail.empty() ? "" : "; ") + s;
  std::printf("  [%s]\n", detail.c_str());
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main() {
  int failed = 0;
  auto tally = [&](bool ok) { failed += ok ? 0 : 1; };
  tally(report(1, "weight-2 competition sweep", criterion1));
  tally(report(2, "pacing sweep", criterion2));
  tally(report(3, "symmetric congestion control", criterion3));

  CappingRun capping;
  bool have_capping = true;
  try {
    capping = run_capping("capping_paired_link");
  } catch (const std::exception& e) {
    std::printf("capping run failed: %s\n", e.what());
    have_capping = false;
  }
  auto need_capping = [&](auto f) {
    return [&, f]() -> Check {
      if (!have_capping) {
        Check c;
        c.expect(false, "capping run unavailable");
        return c;
      }
      return f(capping);
    };
  };
  tally(report(4, "paired-link capping signs", need_capping(criterion4)));
  tally(report(5, "design equivalence and calibration", need_capping(criterion5)));
  tally(report(6, "regression oracles", criterion6));
  tally(report(7, "estimator coverage and aggregation", need_capping(criterion7)));
  tally(report(8, "simulator invariants", criterion8));
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
