#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avsr {

enum class ErrorCode {
  kUnknownCharacter,
  kBlankInText,
  kInvalidVocabulary,
  kInvalidGrid,
  kEmptyGrid,
  kUnalignable,
  kBlankExtension,
  kContextMismatch,
  kBlankToken,
  kLengthMismatch,
  kScorerMismatch,
  kEmptyResult,
  kSearchSpaceTooLarge,
  kFrameCountMismatch,
  kRateMismatch,
  kOddFrameCount,
  kInfeasiblePlan,
  kConstantSignal,
  kSilentNoise,
  kInsufficientSources,
  kSourceTooShort,
  kAllInvalid,
  kDegenerateSource,
  kBoundsError,
  kEmptyReference,
  kInvalidArgument,
  kParseError,
  kIoError,
};

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownCharacter: return "UnknownCharacter";
    case ErrorCode::kBlankInText: return "BlankInText";
    case ErrorCode::kInvalidVocabulary: return "InvalidVocabulary";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kUnalignable: return "Unalignable";
    case ErrorCode::kBlankExtension: return "BlankExtension";
    case ErrorCode::kContextMismatch: return "ContextMismatch";
    case ErrorCode::kBlankToken: return "BlankToken";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kScorerMismatch: return "ScorerMismatch";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kSearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kOddFrameCount: return "OddFrameCount";
    case ErrorCode::kInfeasiblePlan: return "InfeasiblePlan";
    case ErrorCode::kConstantSignal: return "ConstantSignal";
    case ErrorCode::kSilentNoise: return "SilentNoise";
    case ErrorCode::kInsufficientSources: return "InsufficientSources";
    case ErrorCode::kSourceTooShort: return "SourceTooShort";
    case ErrorCode::kAllInvalid: return "AllInvalid";
    case ErrorCode::kDegenerateSource: return "DegenerateSource";
    case ErrorCode::kBoundsError: return "BoundsError";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit. `code()` names the failure kind;
/// `position()` is meaningful for kUnknownCharacter only.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t position = 0)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code),
        position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::size_t position_;
};

}  // namespace avsr
