#include "uspl/errors.hpp"

namespace uspl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::TooFewPaired: return "TooFewPaired";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateBandwidth: return "DegenerateBandwidth";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::MissingLabels: return "MissingLabels";
    case ErrorKind::MissingGraph: return "MissingGraph";
    case ErrorKind::BadFamily: return "BadFamily";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::RatioInfeasible: return "RatioInfeasible";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::TooFewTrials: return "TooFewTrials";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingResults: return "MissingResults";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace uspl
