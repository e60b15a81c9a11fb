#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alpdc {

enum class ErrorCode {
  // corpus
  LineCountMismatch,
  EncodingError,
  EmptyCorpus,
  RatioOutOfRange,
  CorpusTooSmall,
  // capsule
  FormatError,
  DuplicateHeadword,
  LanguageMismatch,
  CapsuleNotFound,
  // langid
  InsufficientText,
  NoProfiles,
  EmptyInput,
  // neural
  DimensionMismatch,
  BadK,
  UnknownModelType,
  // metrics
  LengthMismatch,
  ZeroReference,
  ZeroVector,
  // shared
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::LineCountMismatch: return "LineCountMismatch";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DuplicateHeadword: return "DuplicateHeadword";
    case ErrorCode::LanguageMismatch: return "LanguageMismatch";
    case ErrorCode::CapsuleNotFound: return "CapsuleNotFound";
    case ErrorCode::InsufficientText: return "InsufficientText";
    case ErrorCode::NoProfiles: return "NoProfiles";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::UnknownModelType: return "UnknownModelType";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `what()` carries the human-readable
/// message; `code()` identifies the failure class for callers that branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace alpdc
