#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gradlore {

enum class ErrorCode {
  NotSpd,
  NonFinite,
  BadParams,
  ShapeMismatch,
  BadAlpha,
  Empty,
  ZeroVariance,
  TooFewRows,
  BadMagic,
  TruncatedFile,
  EmptyEval,
  EmptyBatch,
  BadWidth,
  MissingArtifacts,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class; `what()`
/// carries the operation name and detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSpd: return "NotSpd";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::EmptyEval: return "EmptyEval";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::BadWidth: return "BadWidth";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace gradlore
