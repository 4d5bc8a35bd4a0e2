#pragma once

#include <stdexcept>
#include <string>

namespace fcsize {

// Stable numeric values; the C API returns them unchanged.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kInvalidState = 2,
  kModelDivergence = 3,
  kCalibrationInfeasible = 4,
  kInfeasibleBudget = 5,
  kPrecondition = 6,
  kUndefinedMetrics = 7,
  kParse = 8,
  kIo = 9,
  kInternal = 10,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fcsize
