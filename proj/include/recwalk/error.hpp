#pragma once

#include <stdexcept>
#include <string>

namespace recwalk {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  Usage,      // bad configuration or arguments
  Data,       // malformed or degenerate input data
  Numerical,  // an iterative method failed to converge
};

enum class ErrorCode {
  ZeroRow,
  ZeroColumn,
  DimensionMismatch,
  InvalidMatrix,
  NotStochastic,
  ParseError,
  EmptyAfterFiltering,
  EmptyModel,
  NegativeWeight,
  DisconnectedGraph,
  AlphaOutOfRange,
  InvalidParameter,
  ZeroHistory,
  InvalidPartition,
  TooLarge,
  IndexMapMismatch,
  NotConverged,
  Io,
};

const char* to_string(ErrorCode code);
ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ZeroHistory: return "ZeroHistory";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IndexMapMismatch: return "IndexMapMismatch";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

inline ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::AlphaOutOfRange:
    case ErrorCode::InvalidParameter:
      return ErrorKind::Usage;
    case ErrorCode::NotConverged:
      return ErrorKind::Numerical;
    default:
      return ErrorKind::Data;
  }
}

}  // namespace recwalk
