#include "netexp/io/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "netexp/core/error.hpp"

namespace netexp::io {

namespace {

std::vector<std::string> header_columns(const char* header) {
  std::vector<std::string> cols;
  for (auto c : split_csv_line(header)) cols.emplace_back(c);
  return cols;
}

void check_header(std::string_view line, const char* expected, const char* what) {
  const auto want = header_columns(expected);
  const auto got = split_csv_line(line);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size()) fail(ErrorCode::io, std::string(what) + ": missing column '" + want[i] + "'");
    if (got[i] != want[i]) {
      fail(ErrorCode::io, std::string(what) + ": column " + std::to_string(i + 1) +
                              " should be '" + want[i] + "', found '" + std::string(got[i]) + "'");
    }
  }
  if (got.size() > want.size()) {
    fail(ErrorCode::io, std::string(what) + ": unexpected column '" +
                            std::string(got[want.size()]) + "'");
  }
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

template <typename T>
T parse_integer(std::string_view text, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::io, where + ": cannot parse integer '" + std::string(text) + "'");
  }
  return v;
}

double parse_field(std::string_view text, const std::string& where) {
  try {
    return parse_number(text);
  } catch (const Error&) {
    fail(ErrorCode::io, where + ": cannot parse number '" + std::string(text) + "'");
  }
}

std::string row_at(std::size_t line_no, const std::string& column) {
  return "line " + std::to_string(line_no) + ", column '" + column + "'";
}

}  // namespace

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorCode::io, "cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

std::string provenance_line(const std::string& config_hash, std::uint64_t seed) {
  return "# config_hash=" + config_hash + " seed=" + std::to_string(seed);
}

void write_session_log(std::ostream& out, std::span<const SessionRecord> log) {
  out << kSessionLogHeader << '\n';
  for (const auto& r : log) {
    out << r.session_id << ',' << r.account_id << ',' << r.link_id << ','
        << format_number(r.start_time) << ',' << r.hour_of_day << ',' << r.treatment << ','
        << r.cell;
    for (Metric m : kAllMetrics) out << ',' << format_number(r.value(m));
    out << '\n';
  }
}

SessionLog read_session_log(std::istream& in) {
  static const auto columns = header_columns(kSessionLogHeader);
  std::string line;
  if (!next_data_line(in, line)) fail(ErrorCode::io, "session log: missing header row");
  check_header(line, kSessionLogHeader, "session log");
  SessionLog log;
  std::size_t line_no = 1;
  while (next_data_line(in, line)) {
    ++line_no;
    const auto f = split_csv_line(line);
    if (f.size() != columns.size()) {
      fail(ErrorCode::io, "session log line " + std::to_string(line_no) + ": expected " +
                              std::to_string(columns.size()) + " fields, found " +
                              std::to_string(f.size()));
    }
    SessionRecord r;
    r.session_id = parse_integer<std::int64_t>(f[0], row_at(line_no, columns[0]));
    r.account_id = parse_integer<std::int64_t>(f[1], row_at(line_no, columns[1]));
    r.link_id = parse_integer<int>(f[2], row_at(line_no, columns[2]));
    r.start_time = parse_field(f[3], row_at(line_no, columns[3]));
    r.hour_of_day = parse_integer<int>(f[4], row_at(line_no, columns[4]));
    r.treatment = parse_integer<int>(f[5], row_at(line_no, columns[5]));
    if (r.treatment != 0 && r.treatment != 1) {
      fail(ErrorCode::io, row_at(line_no, columns[5]) + ": treatment must be 0 or 1");
    }
    r.cell = std::string(f[6]);
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      r.metrics[kAllMetrics[k]] = parse_field(f[7 + k], row_at(line_no, columns[7 + k]));
    }
    log.push_back(std::move(r));
  }
  return log;
}

void save_session_log(const std::filesystem::path& path, std::span<const SessionRecord> log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  write_session_log(out, log);
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

SessionLog load_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  return read_session_log(in);
}

void write_estimates(std::ostream& out, std::span<const Estimate> estimates,
                     const std::string& provenance) {
  if (!provenance.empty()) out << provenance << '\n';
  out << kEstimatesHeader << '\n';
  for (const auto& e : estimates) {
    out << e.estimand.label() << ',' << to_string(e.metric) << ',' << format_number(e.point) << ','
        << format_number(e.std_error) << ',' << format_number(e.ci95_lo) << ','
        << format_number(e.ci95_hi) << ',';
    if (e.normalization_base && e.normalized) {
      const auto& n = *e.normalized;
      out << format_number(*e.normalization_base) << ',' << format_number(n.point) << ','
          << format_number(n.std_error) << ',' << format_number(n.ci95_lo) << ','
          << format_number(n.ci95_hi);
    } else {
      out << ",,,,";
    }
    out << ',' << e.n_units << ',' << to_string(e.aggregation) << '\n';
  }
}

std::vector<Estimate> read_estimates(std::istream& in) {
  static const auto columns = header_columns(kEstimatesHeader);
  std::string line;
  if (!next_data_line(in, line)) fail(ErrorCode::io, "estimates: missing header row");
  check_header(line, kEstimatesHeader, "estimates");
  std::vector<Estimate> out;
  std::size_t line_no = 1;
  while (next_data_line(in, line)) {
    ++line_no;
    const auto f = split_csv_line(line);
    if (f.size() != columns.size()) {
      fail(ErrorCode::io, "estimates line " + std::to_string(line_no) + ": expected " +
                              std::to_string(columns.size()) + " fields");
    }
    Estimate e;
    auto estimand = Estimand::parse(f[0]);
    if (!estimand) fail(ErrorCode::io, row_at(line_no, columns[0]) + ": unknown estimand");
    e.estimand = *estimand;
    auto metric = parse_metric(f[1]);
    if (!metric) fail(ErrorCode::io, row_at(line_no, columns[1]) + ": unknown metric");
    e.metric = *metric;
    e.point = parse_field(f[2], row_at(line_no, columns[2]));
    e.std_error = parse_field(f[3], row_at(line_no, columns[3]));
    e.ci95_lo = parse_field(f[4], row_at(line_no, columns[4]));
    e.ci95_hi = parse_field(f[5], row_at(line_no, columns[5]));
    if (!f[6].empty()) {
      e.normalization_base = parse_field(f[6], row_at(line_no, columns[6]));
      ScaledValues n;
      n.point = parse_field(f[7], row_at(line_no, columns[7]));
      n.std_error = parse_field(f[8], row_at(line_no, columns[8]));
      n.ci95_lo = parse_field(f[9], row_at(line_no, columns[9]));
      n.ci95_hi = parse_field(f[10], row_at(line_no, columns[10]));
      e.normalized = n;
    }
    e.n_units = parse_integer<std::size_t>(f[11], row_at(line_no, columns[11]));
    auto agg = parse_aggregation(f[12]);
    if (!agg) fail(ErrorCode::io, row_at(line_no, columns[12]) + ": unknown aggregation");
    e.aggregation = *agg;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace netexp::io
