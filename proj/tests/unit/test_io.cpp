#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "netexp/io/commands.hpp"
#include "netexp/io/config.hpp"
#include "netexp/io/csv.hpp"

using namespace netexp;
using namespace netexp::io;

namespace {

const std::filesystem::path kPresets{NETEXP_PRESET_DIR};

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
    return e.issues();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

bool has_path(const std::vector<ConfigIssue>& issues, const std::string& path) {
  for (const auto& i : issues) {
    if (i.path == path) return true;
  }
  return false;
}

const char* kMinimal = R"({
  "name": "mini",
  "links": [{"link_id": 1, "capacity_bps": 1e8}],
  "workload": {"hourly_arrival_rates": [0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,
    0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01]},
  "treatment": {"kind": "inert"},
  "design": {"kind": "ab", "p": 0.5}
})";

SessionRecord sample(std::int64_t id) {
  SessionRecord r;
  r.session_id = id;
  r.account_id = 100 + id;
  r.link_id = 2;
  r.start_time = 3600.5 * id + 0.1;
  r.hour_of_day = hour_of_day_of(r.start_time);
  r.treatment = static_cast<int>(id % 2);
  r.cell = r.treatment ? "link2:T" : "link2:C";
  r.metrics[Metric::avg_throughput] = 4.123456789e6 / id;
  r.metrics[Metric::min_rtt] = 0.1 + 0.2;
  r.metrics[Metric::retrans_frac] = 1e-3 / 3.0;
  r.metrics[Metric::bitrate] = 3e6;
  r.metrics[Metric::play_delay] = 0.7;
  return r;
}

}  // namespace

TEST(Config, MinimalParsesWithDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.name, "mini");
  ASSERT_EQ(c.links.size(), 1u);
  EXPECT_DOUBLE_EQ(c.links[0].capacity_bps, 1e8);
  EXPECT_EQ(c.design.kind, designs::DesignKind::ab);
  EXPECT_EQ(c.metrics.size(), kMetricCount);
}

TEST(Config, OutOfRangeAllocationNamesPath) {
  std::string text = kMinimal;
  text.replace(text.find("\"p\": 0.5"), 8, "\"p\": 1.5");
  EXPECT_TRUE(has_path(issues_of(text), "design.p"));
}

TEST(Config, ReportsEveryIssue) {
  const auto issues = issues_of(R"({
    "links": [{"link_id": 1, "capacity_bps": -1}],
    "workload": {"hourly_arrival_rates": [1, 2]},
    "design": {"kind": "sideways"},
    "bogus": 1
  })");
  EXPECT_TRUE(has_path(issues, "links[0].capacity_bps"));
  EXPECT_TRUE(has_path(issues, "workload.hourly_arrival_rates"));
  EXPECT_TRUE(has_path(issues, "design.kind"));
  EXPECT_TRUE(has_path(issues, "bogus"));
}

TEST(Config, MalformedJsonIsConfigError) {
  try {
    parse_config("{ not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST(Config, PresetsRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(kPresets)) {
    if (entry.path().extension() != ".json") continue;
    const auto c = load_config(entry.path());
    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    EXPECT_EQ(back, c) << entry.path();
    EXPECT_EQ(serialize_config(back), text) << entry.path();
    EXPECT_EQ(config_hash(back), config_hash(c)) << entry.path();
  }
}

TEST(Config, HashChangesWithContent) {
  auto c = parse_config(kMinimal);
  const auto h = config_hash(c);
  c.seed += 1;
  EXPECT_NE(config_hash(c), h);
  EXPECT_EQ(hash_hex(0x1234).size(), 16u);
}

TEST(Csv, NumbersRoundTripExactly) {
  for (double v : {0.1 + 0.2, 1e-300, 123456789.123456789, -0.0, 5e6, 1.0 / 3.0}) {
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
}

TEST(Csv, SessionLogRoundTrip) {
  SessionLog log;
  for (int i = 1; i <= 5; ++i) log.push_back(sample(i));
  std::stringstream ss;
  ss << provenance_line("abc", 7) << "\n";
  write_session_log(ss, log);
  const auto back = read_session_log(ss);
  EXPECT_EQ(back, log);
}

TEST(Csv, HeaderMismatchNamesColumn) {
  std::stringstream ss;
  std::string header = kSessionLogHeader;
  header.replace(header.find("min_rtt_s"), 9, "rtt");
  ss << header << "\n";
  try {
    read_session_log(ss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
    EXPECT_NE(std::string(e.what()).find("min_rtt_s"), std::string::npos) << e.what();
  }
}

TEST(Csv, BadFieldIsIoError) {
  std::stringstream ss;
  ss << kSessionLogHeader << "\n1,1,1,0,0,0,link1:C,abc,0.02,0,1e6,0.5\n";
  EXPECT_THROW(read_session_log(ss), Error);
}

TEST(Csv, EstimatesRoundTrip) {
  auto e = Estimate::from_point(Estimand::spillover(0.95), Metric::min_rtt, 0.25, 0.01, 72,
                                Aggregation::hourly);
  e.normalization_base = 0.5;
  e.normalized = ScaledValues{0.5, 0.02, 0.5 - 0.0392, 0.5 + 0.0392};
  const std::vector<Estimate> v{e, Estimate::from_point(Estimand::tte(), Metric::bitrate, -1.0, 0.5,
                                                        10, Aggregation::account)};
  std::stringstream ss;
  write_estimates(ss, v, provenance_line("ff", 1));
  const auto back = read_estimates(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], v[0]);
  EXPECT_EQ(back[1], v[1]);
}

TEST(Commands, SimulateWritesLogAndSidecar) {
  auto c = parse_config(kMinimal);
  const auto dir = std::filesystem::temp_directory_path() / "netexp_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "log.csv";
  const auto out = cmd_simulate(c, 3, path);
  EXPECT_FALSE(out.result.log.empty());
  EXPECT_EQ(load_session_log(path), out.result.log);
  EXPECT_TRUE(std::filesystem::exists(dir / "log.csv.meta.json"));
  const auto report = cmd_analyze(out.result.log, c, 3);
  ASSERT_FALSE(report.estimates.empty());
  EXPECT_EQ(report.provenance.config_hash, out.provenance.config_hash);
  std::filesystem::remove_all(dir);
}

TEST(Commands, ParallelForVisitsEveryIndex) {
  std::vector<int> hits(257, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
