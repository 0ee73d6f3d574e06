#include "hetlink/error.hpp"

namespace hetlink {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::TypeConstraintViolation: return "TypeConstraintViolation";
    case ErrorCode::SelfLoopRejected: return "SelfLoopRejected";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidMixingWeights: return "InvalidMixingWeights";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CorruptEmbedding: return "CorruptEmbedding";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::InsufficientClusters: return "InsufficientClusters";
    case ErrorCode::NegativeSpaceExhausted: return "NegativeSpaceExhausted";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::StaleTrace: return "StaleTrace";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingScoreColumn: return "MissingScoreColumn";
    case ErrorCode::ArtifactMismatch: return "ArtifactMismatch";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
  }
  return "Unknown";
}

bool Error::is_validation_failure() const noexcept {
  switch (code_) {
    case ErrorCode::ArtifactMismatch:
    case ErrorCode::LeakageDetected:
    case ErrorCode::InsufficientClusters:
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownEntity:
    case ErrorCode::MissingScoreColumn:
      return true;
    default:
      return false;
  }
}

}  // namespace hetlink
