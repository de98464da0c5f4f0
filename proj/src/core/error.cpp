#include "netexp/core/error.hpp"

namespace netexp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_allocation: return "invalid-allocation";
    case ErrorCode::empty_group: return "empty-group";
    case ErrorCode::invalid_design: return "invalid-design";
    case ErrorCode::undefined_spillover: return "undefined-spillover";
    case ErrorCode::insufficient_sweep: return "insufficient-sweep";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::model: return "model";
    case ErrorCode::collinearity: return "collinearity";
    case ErrorCode::invalid_lag: return "invalid-lag";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::empty_log: return "empty-log";
    case ErrorCode::calibration: return "calibration";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::invalid_allocation:
    case ErrorCode::invalid_design:
    case ErrorCode::model:
    case ErrorCode::calibration:
      return 2;
    case ErrorCode::io:
      return 4;
    default:
      return 3;
  }
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace netexp
