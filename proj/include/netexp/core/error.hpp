#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netexp {

enum class ErrorCode {
  invalid_allocation,
  empty_group,
  invalid_design,
  undefined_spillover,
  insufficient_sweep,
  insufficient_data,
  model,
  collinearity,
  invalid_lag,
  normalization,
  config,
  io,
  empty_log,
  calibration,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for a failure of this kind: 2 config, 3 estimation, 4 I/O.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace netexp
