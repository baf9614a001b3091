#include "capflow/error.hpp"

namespace capflow {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NegativeRate: return "NegativeRate";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::EmptyTargetSet: return "EmptyTargetSet";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::OverlappingSets: return "OverlappingSets";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::InfeasibleInputs: return "InfeasibleInputs";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::DegenerateCritical: return "DegenerateCritical";
    case ErrorKind::NotASaddle: return "NotASaddle";
    case ErrorKind::NotAMinimum: return "NotAMinimum";
    case ErrorKind::NonpositiveBarrier: return "NonpositiveBarrier";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::WellMergeError: return "WellMergeError";
    case ErrorKind::NoSaddle: return "NoSaddle";
    case ErrorKind::EmptyWell: return "EmptyWell";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

}  // namespace capflow
