#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetlink {

enum class ErrorCode {
  DuplicateNode,
  TypeConstraintViolation,
  SelfLoopRejected,
  UnknownNode,
  InvalidMixingWeights,
  DimensionMismatch,
  CorruptEmbedding,
  MissingEmbedding,
  InsufficientClusters,
  NegativeSpaceExhausted,
  ShapeError,
  IndexError,
  StaleTrace,
  NonFiniteGradient,
  EmptyInput,
  SingleClassInput,
  ParseError,
  MissingScoreColumn,
  ArtifactMismatch,
  UnknownEntity,
  ConfigError,
  IoError,
  LeakageDetected,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Validation failures map to CLI exit code 2, everything else to 1.
  bool is_validation_failure() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace hetlink
