#include "fcsize/error.hpp"

namespace fcsize {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidState: return "invalid_state";
    case ErrorCode::kModelDivergence: return "model_divergence";
    case ErrorCode::kCalibrationInfeasible: return "calibration_infeasible";
    case ErrorCode::kInfeasibleBudget: return "infeasible_budget";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kUndefinedMetrics: return "undefined_metrics";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace fcsize
