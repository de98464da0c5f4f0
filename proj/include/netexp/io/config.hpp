#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "netexp/core/error.hpp"
#include "netexp/sim/scenario.hpp"

namespace netexp::io {

struct ConfigIssue {
  std::string path;  // e.g. "design.p", "links[1].capacity_bps"
  std::string message;
};

/// Error(config) carrying every schema violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

sim::ScenarioConfig parse_config(std::string_view text);
sim::ScenarioConfig load_config(const std::filesystem::path& path);

/// Design section alone, for files holding design candidates.
designs::DesignConfig parse_design(std::string_view text);

/// Canonical JSON: every field written, keys in schema order.
std::string serialize_config(const sim::ScenarioConfig& config, int indent = 2);

/// FNV-1a of the compact canonical form.
std::uint64_t config_hash(const sim::ScenarioConfig& config);
std::string hash_hex(std::uint64_t hash);

}  // namespace netexp::io
