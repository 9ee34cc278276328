#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorCode {
  InvalidConfig,
  NoVisibleRack,
  GenerationInfeasible,
  InvalidSplit,
  ShapeError,
  EmptyBatch,
  SequenceTooShort,
  UndefinedMetric,
  AlignmentError,
  NoOverlap,
  FormatError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoVisibleRack: return "NoVisibleRack";
    case ErrorCode::GenerationInfeasible: return "GenerationInfeasible";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::UndefinedMetric: return "UndefinedMetric";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. `code()` is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::uint64_t> offset = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        offset_(offset) {}

  ErrorCode code() const noexcept { return code_; }

  /// Byte offset for binary format errors.
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> offset_;
};

}  // namespace forge
