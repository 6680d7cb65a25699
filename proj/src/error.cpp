#include "jointcalib/error.hpp"

namespace jointcalib {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonRotationMatrix: return "NonRotationMatrix";
    case ErrorCode::OutsideValidityRadius: return "OutsideValidityRadius";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidPitch: return "InvalidPitch";
    case ErrorCode::EmptyROI: return "EmptyROI";
    case ErrorCode::NoValidPlane: return "NoValidPlane";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BoardNotVisible: return "BoardNotVisible";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::DegenerateMotion: return "DegenerateMotion";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InsufficientViews: return "InsufficientViews";
    case ErrorCode::FrameConventionMismatch: return "FrameConventionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

}  // namespace jointcalib
