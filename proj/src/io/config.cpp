#include "netexp/io/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "netexp/core/hash.hpp"

namespace netexp::io {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid config:";
  for (const auto& i : issues) out += "\n  " + (i.path.empty() ? "<root>" : i.path) + ": " + i.message;
  return out;
}

struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const {
    if (std::isnan(v)) return false;
    if (lo_open ? v <= lo : v < lo) return false;
    if (hi_open ? v >= hi : v > hi) return false;
    return true;
  }
  std::string describe() const {
    std::ostringstream os;
    os << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
    return os.str();
  }
};

const Range kAny{};
const Range kPositive{0.0, std::numeric_limits<double>::infinity(), true, false};
const Range kNonNegative{0.0};
const Range kProbability{0.0, 1.0};

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void issue(std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  }

  static std::string at(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : base + "." + std::string(key);
  }

  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      issue(path, "expected an object");
      return false;
    }
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) issue(at(path, key), "unknown key");
    }
    return true;
  }

  const json* field(const json& o, const std::string& path, std::string_view key, bool required) {
    auto it = o.find(std::string(key));
    if (it == o.end() || it->is_null()) {
      if (required) issue(at(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  void number(const json& o, const std::string& path, std::string_view key, double& out,
              const Range& range = kAny, bool required = false) {
    const json* v = field(o, path, key, required);
    if (v == nullptr) return;
    if (!v->is_number()) {
      issue(at(path, key), "expected a number");
      return;
    }
    const double d = v->get<double>();
    if (!range.contains(d)) {
      std::ostringstream os;
      os << "value " << d << " outside " << range.describe();
      issue(at(path, key), os.str());
      return;
    }
    out = d;
  }

  void optional_number(const json& o, const std::string& path, std::string_view key,
                       std::optional<double>& out, const Range& range = kAny) {
    if (field(o, path, key, false) == nullptr) return;
    double d = 0.0;
    const auto before = issues.size();
    number(o, path, key, d, range);
    if (issues.size() == before) out = d;
  }

  template <typename I>
  void integer(const json& o, const std::string& path, std::string_view key, I& out,
               double lo = 0, bool required = false) {
    const json* v = field(o, path, key, required);
    if (v == nullptr) return;
    if (!v->is_number_integer()) {
      issue(at(path, key), "expected an integer");
      return;
    }
    if constexpr (std::is_unsigned_v<I>) {
      if (v->is_number_unsigned()) {
        out = static_cast<I>(v->get<std::uint64_t>());
        return;
      }
    }
    const auto x = v->get<std::int64_t>();
    if (static_cast<double>(x) < lo) {
      issue(at(path, key), "value " + std::to_string(x) + " below minimum " +
                               std::to_string(static_cast<long long>(lo)));
      return;
    }
    out = static_cast<I>(x);
  }

  void string(const json& o, const std::string& path, std::string_view key, std::string& out,
              bool required = false) {
    const json* v = field(o, path, key, required);
    if (v == nullptr) return;
    if (!v->is_string()) {
      issue(at(path, key), "expected a string");
      return;
    }
    out = v->get<std::string>();
  }

  template <typename E, std::size_t N>
  void enumeration(const json& o, const std::string& path, std::string_view key, E& out,
                   const std::array<EnumName<E>, N>& names, bool required = false) {
    std::string s;
    const auto before = issues.size();
    if (field(o, path, key, required) == nullptr) return;
    string(o, path, key, s);
    if (issues.size() != before) return;
    for (const auto& n : names) {
      if (n.name == s) {
        out = n.value;
        return;
      }
    }
    std::string allowed;
    for (const auto& n : names) allowed += (allowed.empty() ? "" : "|") + std::string(n.name);
    issue(at(path, key), "unknown value '" + s + "' (expected " + allowed + ")");
  }

  void numbers(const json& o, const std::string& path, std::string_view key,
               std::vector<double>& out, const Range& range, bool required = false) {
    const json* v = field(o, path, key, required);
    if (v == nullptr) return;
    if (!v->is_array()) {
      issue(at(path, key), "expected an array of numbers");
      return;
    }
    std::vector<double> tmp;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      const std::string p = at(path, key) + "[" + std::to_string(i) + "]";
      if (!e.is_number()) {
        issue(p, "expected a number");
        continue;
      }
      const double d = e.get<double>();
      if (!range.contains(d)) {
        std::ostringstream os;
        os << "value " << d << " outside " << range.describe();
        issue(p, os.str());
        continue;
      }
      tmp.push_back(d);
    }
    out = std::move(tmp);
  }
};

constexpr std::array<EnumName<sim::TreatmentKind>, 5> kTreatmentKinds{{
    {sim::TreatmentKind::inert, "inert"},
    {sim::TreatmentKind::weight_multiplier, "weight_multiplier"},
    {sim::TreatmentKind::bitrate_cap, "bitrate_cap"},
    {sim::TreatmentKind::pacing_flag, "pacing_flag"},
    {sim::TreatmentKind::cc_algorithm, "cc_algorithm"},
}};
constexpr std::array<EnumName<sim::CompetitionKind>, 2> kCompetitionKinds{{
    {sim::CompetitionKind::weighted_share, "weighted_share"},
    {sim::CompetitionKind::asymmetric_cc, "asymmetric_cc"},
}};
constexpr std::array<EnumName<designs::DesignKind>, 6> kDesignKinds{{
    {designs::DesignKind::ab, "ab"},
    {designs::DesignKind::paired_link, "paired_link"},
    {designs::DesignKind::switchback, "switchback"},
    {designs::DesignKind::event_study, "event_study"},
    {designs::DesignKind::gradual, "gradual"},
    {designs::DesignKind::aa, "aa"},
}};
constexpr std::array<EnumName<designs::AssignmentMode>, 2> kAssignmentModes{{
    {designs::AssignmentMode::bernoulli, "bernoulli"},
    {designs::AssignmentMode::complete, "complete"},
}};
constexpr std::array<EnumName<designs::IntervalLabeling>, 2> kLabelings{{
    {designs::IntervalLabeling::coin, "coin"},
    {designs::IntervalLabeling::alternating, "alternating"},
}};
constexpr std::array<EnumName<designs::DesignSource>, 2> kSources{{
    {designs::DesignSource::direct, "direct"},
    {designs::DesignSource::paired_link, "paired_link"},
}};

void read_link(Reader& r, const json& j, const std::string& path, sim::LinkSpec& l) {
  if (!r.object(j, path, {"link_id", "capacity_bps", "base_rtt_s", "standing_queue_delay_s",
                          "base_loss", "congestion_loss_multiplier", "congestion_threshold",
                          "drain_probe_per_byte"})) {
    return;
  }
  r.integer(j, path, "link_id", l.link_id, 0, true);
  r.number(j, path, "capacity_bps", l.capacity_bps, kPositive, true);
  r.number(j, path, "base_rtt_s", l.base_rtt_s, kPositive);
  // A 1 BDP buffer by default: the standing queue follows the base RTT.
  l.standing_queue_delay_s = l.base_rtt_s;
  r.number(j, path, "standing_queue_delay_s", l.standing_queue_delay_s, kNonNegative);
  r.number(j, path, "base_loss", l.base_loss, Range{0.0, 1.0, false, true});
  r.number(j, path, "congestion_loss_multiplier", l.congestion_loss_multiplier, kPositive);
  r.number(j, path, "congestion_threshold", l.congestion_threshold, Range{0.0, 1.0, true, false});
  r.number(j, path, "drain_probe_per_byte", l.drain_probe_per_byte, kNonNegative);
}

void read_workload(Reader& r, const json& j, sim::WorkloadSpec& w) {
  const std::string path = "workload";
  if (!r.object(j, path, {"hourly_arrival_rates", "session_duration_s", "bitrate_ladder_bps",
                          "ladder_fraction", "abr_window_steps", "startup_bytes", "n_days", "daily_demand_multipliers",
                          "n_accounts", "persistent_apps", "access_rate_bps", "access_rate_spread",
                          "chunk_duration_s",
                          "ramp_rtts"})) {
    return;
  }
  r.integer(j, path, "persistent_apps", w.persistent_apps, 0);
  std::vector<double> rates;
  r.numbers(j, path, "hourly_arrival_rates", rates, kNonNegative, w.persistent_apps == 0);
  if (j.contains("hourly_arrival_rates") && j["hourly_arrival_rates"].is_array()) {
    if (j["hourly_arrival_rates"].size() != 24) {
      r.issue("workload.hourly_arrival_rates",
              "expected 24 entries, found " + std::to_string(j["hourly_arrival_rates"].size()));
    } else if (rates.size() == 24) {
      std::copy(rates.begin(), rates.end(), w.hourly_arrival_rates.begin());
    }
  }
  r.number(j, path, "session_duration_s", w.session_duration_s, kPositive);
  r.numbers(j, path, "bitrate_ladder_bps", w.bitrate_ladder_bps, kPositive);
  if (w.bitrate_ladder_bps.empty()) r.issue("workload.bitrate_ladder_bps", "ladder is empty");
  for (std::size_t i = 1; i < w.bitrate_ladder_bps.size(); ++i) {
    if (!(w.bitrate_ladder_bps[i] > w.bitrate_ladder_bps[i - 1])) {
      r.issue("workload.bitrate_ladder_bps", "ladder must be strictly ascending");
      break;
    }
  }
  r.number(j, path, "ladder_fraction", w.ladder_fraction, Range{0.0, 1.0, true, false});
  r.integer(j, path, "abr_window_steps", w.abr_window_steps, 1);
  r.number(j, path, "startup_bytes", w.startup_bytes, kNonNegative);
  r.integer(j, path, "n_days", w.n_days, 1);
  r.numbers(j, path, "daily_demand_multipliers", w.daily_demand_multipliers, kNonNegative);
  if (!w.daily_demand_multipliers.empty() &&
      w.daily_demand_multipliers.size() != static_cast<std::size_t>(w.n_days)) {
    r.issue("workload.daily_demand_multipliers",
            "expected one entry per day (" + std::to_string(w.n_days) + ")");
  }
  r.integer(j, path, "n_accounts", w.n_accounts, 1);
  r.number(j, path, "access_rate_spread", w.access_rate_spread, kNonNegative);
  r.number(j, path, "chunk_duration_s", w.chunk_duration_s, kPositive);
  r.number(j, path, "ramp_rtts", w.ramp_rtts, kNonNegative);
  if (const json* a = r.field(j, path, "access_rate_bps", false)) {
    if (a->is_string() && a->get<std::string>() == "unbounded") {
      w.access_rate_bps = sim::kUnbounded;
    } else {
      r.number(j, path, "access_rate_bps", w.access_rate_bps, kPositive);
    }
  }
}

void read_competition(Reader& r, const json& j, sim::CompetitionModel& c) {
  const std::string path = "competition";
  if (!r.object(j, path, {"kind", "loss_exponent", "pacing_loss_floor", "default_cc_kappa",
                          "cc_kappa", "max_weight"})) {
    return;
  }
  r.enumeration(j, path, "kind", c.kind, kCompetitionKinds);
  r.number(j, path, "loss_exponent", c.loss_exponent, kNonNegative);
  r.number(j, path, "pacing_loss_floor", c.pacing_loss_floor, Range{0.0, 1.0, true, false});
  r.number(j, path, "default_cc_kappa", c.default_cc_kappa, kNonNegative);
  if (const json* k = r.field(j, path, "cc_kappa", false)) {
    if (!k->is_object()) {
      r.issue("competition.cc_kappa", "expected an object of algorithm -> kappa");
    } else {
      for (const auto& [name, v] : k->items()) {
        double kappa = 0.0;
        const auto before = r.issues.size();
        r.number(*k, "competition.cc_kappa", name, kappa, kNonNegative, true);
        if (r.issues.size() == before) c.cc_kappa[name] = kappa;
      }
    }
  }
  r.number(j, path, "max_weight", c.max_weight, Range{1.0});
}

void read_treatment(Reader& r, const json& j, sim::TreatmentSpec& t) {
  const std::string path = "treatment";
  if (!r.object(j, path, {"kind", "multiplier", "cap_bps", "unpaced_weight", "algorithm",
                          "control_algorithm"})) {
    return;
  }
  r.enumeration(j, path, "kind", t.kind, kTreatmentKinds, true);
  r.number(j, path, "multiplier", t.multiplier, kPositive);
  r.number(j, path, "cap_bps", t.cap_bps, kNonNegative, t.kind == sim::TreatmentKind::bitrate_cap);
  r.number(j, path, "unpaced_weight", t.unpaced_weight, kPositive);
  r.string(j, path, "algorithm", t.algorithm);
  r.string(j, path, "control_algorithm", t.control_algorithm);
}

void read_design(Reader& r, const json& j, designs::DesignConfig& d) {
  const std::string path = "design";
  if (!r.object(j, path, {"kind", "p", "assignment", "p_high", "p_low", "interval_length_s",
                          "within_alloc", "labeling", "burn_in_s", "change_time_s", "pre_alloc",
                          "post_alloc", "schedule", "source", "seed"})) {
    return;
  }
  r.enumeration(j, path, "kind", d.kind, kDesignKinds, true);
  r.number(j, path, "p", d.p, kProbability);
  r.enumeration(j, path, "assignment", d.assignment, kAssignmentModes);
  r.number(j, path, "p_high", d.p_high, kProbability);
  r.number(j, path, "p_low", d.p_low, kProbability);
  r.number(j, path, "interval_length_s", d.interval_length_s, kPositive);
  r.number(j, path, "within_alloc", d.within_alloc, kProbability);
  r.enumeration(j, path, "labeling", d.labeling, kLabelings);
  r.number(j, path, "burn_in_s", d.burn_in_s, kNonNegative);
  r.optional_number(j, path, "change_time_s", d.change_time_s, kPositive);
  if (d.kind == designs::DesignKind::event_study && !d.change_time_s &&
      !(j.contains("change_time_s") && !j["change_time_s"].is_null())) {
    r.issue("design.change_time_s", "missing required field");
  }
  r.number(j, path, "pre_alloc", d.pre_alloc, kProbability);
  r.number(j, path, "post_alloc", d.post_alloc, kProbability);
  if (const json* s = r.field(j, path, "schedule", d.kind == designs::DesignKind::gradual)) {
    if (!s->is_array()) {
      r.issue("design.schedule", "expected an array of {start_time_s, p}");
    } else {
      d.schedule.clear();
      for (std::size_t i = 0; i < s->size(); ++i) {
        const std::string p = "design.schedule[" + std::to_string(i) + "]";
        designs::Phase phase;
        if (!r.object((*s)[i], p, {"start_time_s", "p"})) continue;
        r.number((*s)[i], p, "start_time_s", phase.start_time_s, kNonNegative, true);
        r.number((*s)[i], p, "p", phase.p, kProbability, true);
        d.schedule.push_back(phase);
      }
    }
  }
  r.enumeration(j, path, "source", d.source, kSources);
  if (r.field(j, path, "seed", false) != nullptr) {
    std::uint64_t seed = 0;
    const auto before = r.issues.size();
    r.integer(j, path, "seed", seed);
    if (r.issues.size() == before) d.seed = seed;
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError({{"", std::string("malformed JSON: ") + e.what()}});
  }
}

ojson design_json(const designs::DesignConfig& d) {
  ojson j;
  j["kind"] = std::string(designs::to_string(d.kind));
  j["p"] = d.p;
  j["assignment"] = std::string(designs::to_string(d.assignment));
  j["p_high"] = d.p_high;
  j["p_low"] = d.p_low;
  j["interval_length_s"] = d.interval_length_s;
  j["within_alloc"] = d.within_alloc;
  j["labeling"] = std::string(designs::to_string(d.labeling));
  j["burn_in_s"] = d.burn_in_s;
  if (d.change_time_s) j["change_time_s"] = *d.change_time_s;
  j["pre_alloc"] = d.pre_alloc;
  j["post_alloc"] = d.post_alloc;
  j["schedule"] = ojson::array();
  for (const auto& ph : d.schedule) {
    ojson p;
    p["start_time_s"] = ph.start_time_s;
    p["p"] = ph.p;
    j["schedule"].push_back(p);
  }
  j["source"] = std::string(designs::to_string(d.source));
  if (d.seed) j["seed"] = *d.seed;
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::config, join_issues(issues)), issues_(std::move(issues)) {}

sim::ScenarioConfig parse_config(std::string_view text) {
  const json j = parse_json(text);
  Reader r;
  sim::ScenarioConfig c;
  if (!r.object(j, "", {"name", "links", "workload", "competition", "treatment", "design", "seed",
                        "metrics", "replication_count", "dt_s"})) {
    throw ConfigError(std::move(r.issues));
  }
  r.string(j, "", "name", c.name);
  if (const json* links = r.field(j, "", "links", true)) {
    if (!links->is_array() || links->empty()) {
      r.issue("links", "expected a non-empty array of links");
    } else {
      c.links.clear();
      for (std::size_t i = 0; i < links->size(); ++i) {
        sim::LinkSpec l;
        read_link(r, (*links)[i], "links[" + std::to_string(i) + "]", l);
        c.links.push_back(l);
      }
    }
  }
  if (const json* w = r.field(j, "", "workload", true)) read_workload(r, *w, c.workload);
  if (const json* m = r.field(j, "", "competition", false)) read_competition(r, *m, c.competition);
  if (const json* t = r.field(j, "", "treatment", true)) read_treatment(r, *t, c.treatment);
  if (const json* d = r.field(j, "", "design", true)) read_design(r, *d, c.design);
  r.integer(j, "", "seed", c.seed);
  if (const json* m = r.field(j, "", "metrics", false)) {
    if (!m->is_array() || m->empty()) {
      r.issue("metrics", "expected a non-empty array of metric names");
    } else {
      c.metrics.clear();
      for (std::size_t i = 0; i < m->size(); ++i) {
        const auto& e = (*m)[i];
        const std::string p = "metrics[" + std::to_string(i) + "]";
        if (!e.is_string()) {
          r.issue(p, "expected a metric name");
        } else if (auto metric = parse_metric(e.get<std::string>())) {
          c.metrics.push_back(*metric);
        } else {
          r.issue(p, "unknown metric '" + e.get<std::string>() + "'");
        }
      }
    }
  }
  r.integer(j, "", "replication_count", c.replication_count, 1);
  r.number(j, "", "dt_s", c.dt_s, kPositive);

  if (r.issues.empty()) {
    try {
      c.validate();
    } catch (const Error& e) {
      r.issue(e.code() == ErrorCode::invalid_design ? "design" : "", e.what());
    }
  }
  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return c;
}

designs::DesignConfig parse_design(std::string_view text) {
  const json j = parse_json(text);
  Reader r;
  designs::DesignConfig d;
  read_design(r, j, d);
  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return d;
}

sim::ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const sim::ScenarioConfig& c, int indent) {
  ojson j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["replication_count"] = c.replication_count;
  j["dt_s"] = c.dt_s;
  j["metrics"] = ojson::array();
  for (Metric m : c.metrics) j["metrics"].push_back(std::string(to_string(m)));
  j["links"] = ojson::array();
  for (const auto& l : c.links) {
    ojson o;
    o["link_id"] = l.link_id;
    o["capacity_bps"] = l.capacity_bps;
    o["base_rtt_s"] = l.base_rtt_s;
    o["standing_queue_delay_s"] = l.standing_queue_delay_s;
    o["base_loss"] = l.base_loss;
    o["congestion_loss_multiplier"] = l.congestion_loss_multiplier;
    o["congestion_threshold"] = l.congestion_threshold;
    o["drain_probe_per_byte"] = l.drain_probe_per_byte;
    j["links"].push_back(o);
  }
  const auto& w = c.workload;
  ojson wj;
  wj["hourly_arrival_rates"] = w.hourly_arrival_rates;
  wj["session_duration_s"] = w.session_duration_s;
  wj["bitrate_ladder_bps"] = w.bitrate_ladder_bps;
  wj["ladder_fraction"] = w.ladder_fraction;
  wj["abr_window_steps"] = w.abr_window_steps;
  wj["startup_bytes"] = w.startup_bytes;
  wj["n_days"] = w.n_days;
  wj["daily_demand_multipliers"] = w.daily_demand_multipliers;
  wj["n_accounts"] = w.n_accounts;
  wj["persistent_apps"] = w.persistent_apps;
  if (std::isinf(w.access_rate_bps)) {
    wj["access_rate_bps"] = "unbounded";
  } else {
    wj["access_rate_bps"] = w.access_rate_bps;
  }
  wj["access_rate_spread"] = w.access_rate_spread;
  wj["chunk_duration_s"] = w.chunk_duration_s;
  wj["ramp_rtts"] = w.ramp_rtts;
  j["workload"] = wj;
  const auto& m = c.competition;
  ojson mj;
  mj["kind"] = std::string(sim::to_string(m.kind));
  mj["loss_exponent"] = m.loss_exponent;
  mj["pacing_loss_floor"] = m.pacing_loss_floor;
  mj["default_cc_kappa"] = m.default_cc_kappa;
  mj["cc_kappa"] = ojson::object();
  for (const auto& [name, k] : m.cc_kappa) mj["cc_kappa"][name] = k;
  mj["max_weight"] = m.max_weight;
  j["competition"] = mj;
  const auto& t = c.treatment;
  ojson tj;
  tj["kind"] = std::string(sim::to_string(t.kind));
  tj["multiplier"] = t.multiplier;
  tj["cap_bps"] = t.cap_bps;
  tj["unpaced_weight"] = t.unpaced_weight;
  tj["algorithm"] = t.algorithm;
  tj["control_algorithm"] = t.control_algorithm;
  j["treatment"] = tj;
  j["design"] = design_json(c.design);
  return j.dump(indent);
}

std::uint64_t config_hash(const sim::ScenarioConfig& config) {
  return fnv1a64(serialize_config(config, -1));
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace netexp::io
