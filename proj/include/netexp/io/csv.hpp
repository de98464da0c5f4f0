#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netexp/core/types.hpp"

namespace netexp::io {

inline constexpr const char* kSessionLogHeader =
    "session_id,account_id,link_id,start_time_s,hour,treatment,cell,avg_throughput_bps,"
    "min_rtt_s,retrans_frac,bitrate_bps,play_delay_s";

inline constexpr const char* kEstimatesHeader =
    "estimand,metric,point,se,ci95_lo,ci95_hi,normalization_base,point_normalized,"
    "se_normalized,ci95_lo_normalized,ci95_hi_normalized,n_units,aggregation";

/// Shortest text that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

/// Lines starting with '#' before the header are provenance comments.
std::string provenance_line(const std::string& config_hash, std::uint64_t seed);

void write_session_log(std::ostream& out, std::span<const SessionRecord> log);
/// Throws Error(io) naming the offending column on any schema mismatch.
SessionLog read_session_log(std::istream& in);
void save_session_log(const std::filesystem::path& path, std::span<const SessionRecord> log);
SessionLog load_session_log(const std::filesystem::path& path);

void write_estimates(std::ostream& out, std::span<const Estimate> estimates,
                     const std::string& provenance = {});
std::vector<Estimate> read_estimates(std::istream& in);

/// Splits one CSV line; fields may not contain commas or quotes.
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace netexp::io
