#include "epds/error.hpp"

namespace epds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DisconnectedTopology: return "DisconnectedTopology";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::OverlapRejected: return "OverlapRejected";
    case ErrorCode::NoPendingReservation: return "NoPendingReservation";
    case ErrorCode::OutOfRangeVoltage: return "OutOfRangeVoltage";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::AllRowsDropped: return "AllRowsDropped";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace epds
