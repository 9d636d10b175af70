#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kimatch {

enum class ErrorCode {
  FormatError,
  EmptyLexicon,
  EmbedderUnavailable,
  DegenerateColumn,
  ZeroVector,
  DimensionMismatch,
  SingleClass,
  MissingComponent,
  Divergence,
  BackendUnavailable,
  EmptyText,
  NoConditions,
  NoIdleSP,
  RejectedNotSS,
  UnknownSS,
  UnknownSP,
  NoModel,
  SPBusy,
  NotRecommended,
  BadConfidence,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kimatch
