#include "netexp/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "netexp/causal/assignment.hpp"
#include "netexp/core/error.hpp"
#include "netexp/core/hash.hpp"
#include "netexp/sim/step.hpp"

namespace netexp::sim {

std::vector<int> ScenarioConfig::link_ids() const {
  std::vector<int> ids;
  for (const auto& l : links) ids.push_back(l.link_id);
  return ids;
}

const LinkSpec& ScenarioConfig::link(int link_id) const {
  for (const auto& l : links) {
    if (l.link_id == link_id) return l;
  }
  fail(ErrorCode::config, "unknown link " + std::to_string(link_id));
}

designs::PlanFrame ScenarioConfig::frame(std::uint64_t run_seed) const {
  designs::PlanFrame f;
  f.horizon_s = workload.horizon_s();
  f.links = link_ids();
  f.seed = run_seed;
  f.daily_demand_multipliers = workload.daily_demand_multipliers;
  return f;
}

designs::PlannedDesign ScenarioConfig::plan(std::uint64_t run_seed) const {
  return designs::build_design(design, frame(run_seed));
}

void ScenarioConfig::validate() const {
  try {
    if (links.empty()) fail(ErrorCode::config, "links: at least one link is required");
    std::set<int> ids;
    for (const auto& l : links) {
      l.validate();
      if (!ids.insert(l.link_id).second) {
        fail(ErrorCode::config, "links: duplicate link_id " + std::to_string(l.link_id));
      }
    }
    workload.validate();
    competition.validate();
    treatment.validate();
    if (metrics.empty()) fail(ErrorCode::config, "metrics: at least one metric is required");
    if (replication_count < 1) fail(ErrorCode::config, "replication_count must be >= 1");
    if (!(dt_s > 0)) fail(ErrorCode::config, "dt_s must be > 0");
    plan(seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config || e.code() == ErrorCode::invalid_design) throw;
    fail(ErrorCode::config, e.what());
  }
}

int LinkTrace::congested_hours() const {
  return static_cast<int>(std::count_if(hours.begin(), hours.end(),
                                        [](const HourTrace& h) { return h.congested(); }));
}

namespace {

struct Session {
  std::int64_t id = 0;
  std::int64_t account = 0;
  std::int64_t unit = 0;
  int link = 1;
  double start = 0.0;
  std::int64_t first_step = 0;
  int n_steps = 1;
  bool treated = false;
  bool backlogged = false;
  double access_rate = kUnbounded;
};

struct Accumulator {
  double attainable_sum = 0.0;
  double bitrate_sum = 0.0;
  double first_attainable = 0.0;
  double first_queue = 0.0;
  std::deque<double> recent;  // trailing attainable rates, ABR window
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double measured_throughput(double attainable, double bitrate, double rtt, const WorkloadSpec& w) {
  if (w.ramp_rtts <= 0.0 || attainable <= 0.0) return attainable;
  const double chunk_bits = bitrate * w.chunk_duration_s;
  return attainable * chunk_bits / (chunk_bits + attainable * w.ramp_rtts * rtt);
}

std::vector<Session> generate_sessions(const ScenarioConfig& config, std::uint64_t seed) {
  const auto& w = config.workload;
  const auto link_ids = config.link_ids();
  const auto n_links = static_cast<std::uint64_t>(link_ids.size());
  std::vector<Session> out;

  if (w.persistent()) {
    const auto per_app = static_cast<std::int64_t>(std::ceil(w.horizon_s() / w.session_duration_s - 1e-9));
    const auto n = static_cast<std::int64_t>(w.persistent_apps);
    for (std::int64_t k = 0; k < per_app; ++k) {
      for (std::int64_t a = 0; a < n; ++a) {
        Session s;
        s.id = k * n + a + 1;
        s.account = a + 1;
        s.unit = a + 1;
        s.link = link_ids[static_cast<std::size_t>(a) % link_ids.size()];
        s.start = static_cast<double>(k) * w.session_duration_s;
        s.backlogged = true;
        out.push_back(s);
      }
    }
    return out;
  }

  std::mt19937_64 rng(stable_hash(seed, 0, HashStream::arrivals));
  std::int64_t next_id = 1;
  for (int day = 0; day < w.n_days; ++day) {
    for (int h = 0; h < 24; ++h) {
      const double rate = w.hourly_arrival_rates[static_cast<std::size_t>(h)] * w.day_multiplier(day);
      if (rate <= 0.0) continue;
      const double hour_start = day * kSecondsPerDay + h * kSecondsPerHour;
      const double hour_end = hour_start + kSecondsPerHour;
      double t = hour_start;
      while (true) {
        t += -std::log1p(-uniform01(rng)) / rate;
        if (t >= hour_end) break;
        Session s;
        s.id = next_id++;
        const auto key = static_cast<std::uint64_t>(s.id);
        s.account = 1 + static_cast<std::int64_t>(stable_hash(seed, key, HashStream::account) %
                                                  static_cast<std::uint64_t>(w.n_accounts));
        s.unit = s.id;
        s.link = link_ids[stable_hash(seed, key, HashStream::link_routing) % n_links];
        s.start = t;
        out.push_back(s);
      }
    }
  }
  return out;
}

double account_access_rate(const WorkloadSpec& w, std::int64_t account, std::uint64_t seed) {
  if (w.access_rate_spread <= 0.0 || std::isinf(w.access_rate_bps)) return w.access_rate_bps;
  std::mt19937_64 rng(stable_hash(seed, static_cast<std::uint64_t>(account), HashStream::access_rate));
  std::lognormal_distribution<double> spread(0.0, w.access_rate_spread);
  return w.access_rate_bps * spread(rng);
}

void assign_treatment(std::vector<Session>& sessions, const designs::DesignPlan& plan) {
  if (plan.assignment == designs::AssignmentMode::bernoulli) {
    for (auto& s : sessions) {
      s.treated = causal::bernoulli_draw(s.unit, plan.allocation(s.link, s.start), plan.assignment_seed);
    }
    return;
  }
  // Complete randomization within each (link, segment): exactly round(p * units) treated.
  std::map<std::pair<int, double>, std::vector<std::int64_t>> groups;
  for (const auto& s : sessions) {
    groups[{s.link, plan.segment(s.link, s.start).start_s}].push_back(s.unit);
  }
  std::map<std::pair<int, double>, std::set<std::int64_t>> treated;
  for (auto& [key, units] : groups) {
    std::sort(units.begin(), units.end());
    units.erase(std::unique(units.begin(), units.end()), units.end());
    const double p = plan.allocation(key.first, key.second);
    const auto a = causal::assign_complete(units, p, plan.assignment_seed);
    auto& set = treated[key];
    for (std::size_t i = 0; i < a.unit_ids.size(); ++i) {
      if (a.assignments[i]) set.insert(a.unit_ids[i]);
    }
  }
  for (auto& s : sessions) {
    s.treated = treated[{s.link, plan.segment(s.link, s.start).start_s}].count(s.unit) > 0;
  }
}

}  // namespace

SimulationResult run_scenario(const ScenarioConfig& config, const designs::DesignPlan& plan,
                              std::uint64_t seed) {
  const auto& w = config.workload;
  const auto& tr = config.treatment;
  for (int id : config.link_ids()) {
    if (!plan.has_link(id)) {
      fail(ErrorCode::invalid_design, "plan has no allocation for link " + std::to_string(id));
    }
  }

  auto sessions = generate_sessions(config, seed);
  if (sessions.empty()) {
    fail(ErrorCode::empty_log, "no sessions arrived over the " + std::to_string(w.n_days) +
                                   "-day horizon");
  }
  assign_treatment(sessions, plan);
  for (auto& s : sessions) s.access_rate = account_access_rate(w, s.account, seed);

  const double dt = config.dt_s;
  const int steps_per_session =
      std::max(1, static_cast<int>(std::llround(w.session_duration_s / dt)));
  std::int64_t last_step = 0;
  for (auto& s : sessions) {
    s.first_step = static_cast<std::int64_t>(std::floor(s.start / dt));
    s.n_steps = steps_per_session;
    last_step = std::max(last_step, s.first_step + s.n_steps);
  }

  StepContext ctx;
  ctx.dt_s = dt;
  ctx.model = config.competition;
  ctx.pacing_model = tr.kind == TreatmentKind::pacing_flag;
  ctx.seed = seed;
  const bool cc = tr.kind == TreatmentKind::cc_algorithm &&
                  config.competition.kind == CompetitionKind::asymmetric_cc;
  const double kappa_t = config.competition.kappa_for(tr.algorithm);
  const double kappa_c = config.competition.kappa_for(tr.control_algorithm);
  const std::optional<double> cap =
      tr.kind == TreatmentKind::bitrate_cap ? std::optional<double>(tr.cap_bps) : std::nullopt;

  const auto horizon_hours =
      static_cast<std::size_t>(std::ceil(w.horizon_s() / kSecondsPerHour - 1e-9));
  const std::size_t n_links = config.links.size();
  std::vector<LinkState> states(n_links);
  std::vector<LinkTrace> traces(n_links);
  std::vector<std::vector<std::size_t>> arrivals(n_links);  // session indices by link, in start order
  std::map<int, std::size_t> link_slot;
  for (std::size_t l = 0; l < n_links; ++l) {
    states[l].spec = config.links[l];
    traces[l].link_id = config.links[l].link_id;
    traces[l].hours.resize(horizon_hours);
    for (std::size_t h = 0; h < horizon_hours; ++h) {
      traces[l].hours[h].hour_index = static_cast<std::int64_t>(h);
    }
    link_slot[config.links[l].link_id] = l;
  }
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    arrivals[link_slot.at(sessions[i].link)].push_back(i);
  }

  std::vector<Accumulator> acc(sessions.size());
  SimulationResult result;
  result.log.reserve(sessions.size());
  std::vector<std::vector<FlowState>> active(n_links);
  std::vector<std::size_t> cursor(n_links, 0);

  auto finish = [&](const FlowState& f, const LinkSpec& spec) {
    const Session& s = sessions[f.session];
    const Accumulator& a = acc[f.session];
    const double steps = static_cast<double>(std::max(f.steps, 1));
    SessionRecord r;
    r.session_id = s.id;
    r.account_id = s.account;
    r.link_id = s.link;
    r.start_time = s.start;
    r.hour_of_day = hour_of_day_of(s.start);
    r.treatment = s.treated ? 1 : 0;
    r.cell = plan.cell_label(s.link, s.start, s.treated);
    r.metrics[Metric::avg_throughput] = a.attainable_sum / steps;
    r.metrics[Metric::min_rtt] = spec.base_rtt_s + f.min_queue_delay_seen;
    r.metrics[Metric::retrans_frac] =
        f.delivered_bytes > 0.0 ? f.retransmitted_bytes / f.delivered_bytes : 0.0;
    r.metrics[Metric::bitrate] = a.bitrate_sum / steps;
    r.metrics[Metric::play_delay] = w.startup_bytes * 8.0 / std::max(a.first_attainable, 1.0) +
                                    2.0 * (spec.base_rtt_s + a.first_queue);
    result.log.push_back(std::move(r));
  };

  std::vector<double> chosen;
  for (std::int64_t step = 0; step < last_step; ++step) {
    for (std::size_t l = 0; l < n_links; ++l) {
      auto& flows = active[l];
      auto& queue = arrivals[l];
      while (cursor[l] < queue.size() && sessions[queue[cursor[l]]].first_step == step) {
        const std::size_t idx = queue[cursor[l]++];
        const Session& s = sessions[idx];
        FlowState f;
        f.session = idx;
        f.session_id = s.id;
        f.start_time = s.start;
        f.end_time = s.start + w.session_duration_s;
        if (tr.kind == TreatmentKind::weight_multiplier && s.treated) f.weight = tr.multiplier;
        if (tr.kind == TreatmentKind::pacing_flag) {
          f.unpaced = !s.treated;
          f.weight = s.treated ? 1.0 : tr.unpaced_weight;
        }
        flows.push_back(f);
      }
      if (flows.empty() && cursor[l] >= queue.size()) continue;

      std::size_t n_treated = 0;
      for (const auto& f : flows) n_treated += sessions[f.session].treated ? 1 : 0;
      const double frac_t =
          flows.empty() ? 0.0 : static_cast<double>(n_treated) / static_cast<double>(flows.size());

      chosen.assign(flows.size(), 0.0);
      for (std::size_t i = 0; i < flows.size(); ++i) {
        auto& f = flows[i];
        const Session& s = sessions[f.session];
        const auto& a = acc[f.session];
        const std::optional<double> my_cap = s.treated ? cap : std::nullopt;
        if (a.recent.empty()) {
          chosen[i] = w.bitrate_ladder_bps.front();
        } else {
          const double est = std::accumulate(a.recent.begin(), a.recent.end(), 0.0) /
                             static_cast<double>(a.recent.size());
          chosen[i] = choose_bitrate(est, w, my_cap);
        }
        f.demand = s.backlogged ? s.access_rate : chosen[i];
        if (cc) {
          f.weight = s.treated ? asymmetric_cc_weight(frac_t, kappa_t)
                               : asymmetric_cc_weight(1.0 - frac_t, kappa_c);
        }
      }

      auto& link = states[l];
      advance_step(link, flows, ctx);

      const auto hour = static_cast<std::size_t>(std::floor(static_cast<double>(step) * dt / kSecondsPerHour));
      if (hour < horizon_hours) {
        auto& h = traces[l].hours[hour];
        ++h.steps;
        h.congested_steps += link.congested ? 1 : 0;
        h.mean_utilization += std::min(link.utilization, 10.0);
        h.mean_active_flows += static_cast<double>(flows.size());
        traces[l].congested_steps += link.congested ? 1 : 0;
      }

      std::size_t kept = 0;
      for (std::size_t i = 0; i < flows.size(); ++i) {
        auto& f = flows[i];
        auto& a = acc[f.session];
        f.attainable = std::min(f.attainable, sessions[f.session].access_rate);
        if (f.steps == 1) {
          a.first_attainable = f.attainable;
          a.first_queue = f.queue_delay;
        }
        a.attainable_sum += measured_throughput(f.attainable, chosen[i],
                                                link.spec.base_rtt_s + f.queue_delay, w);
        a.bitrate_sum += chosen[i];
        a.recent.push_back(f.attainable);
        if (a.recent.size() > static_cast<std::size_t>(w.abr_window_steps)) a.recent.pop_front();
        if (f.steps >= sessions[f.session].n_steps) {
          finish(f, link.spec);
        } else {
          flows[kept++] = f;
        }
      }
      flows.resize(kept);
    }
  }

  for (auto& t : traces) {
    for (auto& h : t.hours) {
      if (h.steps > 0) {
        h.mean_utilization /= h.steps;
        h.mean_active_flows /= h.steps;
      }
    }
  }
  std::sort(result.log.begin(), result.log.end(),
            [](const SessionRecord& a, const SessionRecord& b) { return a.session_id < b.session_id; });
  result.links = std::move(traces);
  result.steps = last_step;
  return result;
}

SimulationResult run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  const auto design = config.plan(seed);
  return run_scenario(config, design.plan, seed);
}

}  // namespace netexp::sim
