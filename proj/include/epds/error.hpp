#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epds {

enum class ErrorCode {
  DuplicateId,
  DisconnectedTopology,
  UnknownNode,
  OverlapRejected,
  NoPendingReservation,
  OutOfRangeVoltage,
  EmptySequence,
  SchemaMismatch,
  NonMonotoneTimestamps,
  AllRowsDropped,
  SequenceTooShort,
  DimensionMismatch,
  ShapeMismatch,
  DivergenceDetected,
  LengthMismatch,
  NotAdjacent,
  NoPath,
  InvalidArgument,
  Deadlock,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace epds
