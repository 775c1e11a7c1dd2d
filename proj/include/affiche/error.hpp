#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affiche {

enum class ErrorCode {
  MissingFile,
  ParseError,
  ValidationError,
  ScorerFailure,
  AllZeroWeights,
  EmptyFormatList,
  StyleProfileMismatch,
  AttemptCapExceeded,
  MinRowHeightUnreachable,
  MinRowHeight,
  NoMovableAxis,
  FontResourceMissing,
  InvalidBarCount,
  StoreUnavailable,
  PipelineFailure,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the engine. `where` carries the key path for
// config errors, the item id for pipeline errors, and is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string where = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::string where_;
};

}  // namespace affiche
