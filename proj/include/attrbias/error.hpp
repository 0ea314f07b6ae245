#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attrbias {

enum class ErrorCode {
  MalformedHeader,
  DimensionMismatch,
  DuplicateSample,
  UnknownValue,
  MissingColumn,
  EmptyJoin,
  ZeroVector,
  NoGenuinePairs,
  NoImpostorPairs,
  UnknownSample,
  EmptyScores,
  UnknownAttribute,
  SizeExceedsDataset,
  GroupTooSmall,
  InsufficientPairs,
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace attrbias
