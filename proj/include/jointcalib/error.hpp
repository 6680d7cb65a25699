#pragma once

#include <stdexcept>
#include <string>

namespace jointcalib {

enum class ErrorCode {
  NonRotationMatrix,
  OutsideValidityRadius,
  NoConvergence,
  BehindCamera,
  InvalidSpec,
  InvalidPitch,
  EmptyROI,
  NoValidPlane,
  DegenerateTarget,
  DimensionMismatch,
  BoardNotVisible,
  DegenerateConfiguration,
  DegenerateMotion,
  NotPositiveDefinite,
  InsufficientViews,
  FrameConventionMismatch,
  ConfigError,
  IoError,
  ParseError,
};

const char* to_string(ErrorCode code);

class CalibError : public std::runtime_error {
 public:
  CalibError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw CalibError(code, detail);
}

}  // namespace jointcalib
