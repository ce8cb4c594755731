#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uspl {

enum class ErrorKind {
  NotPositiveDefinite,
  ConvergenceFailure,
  ZeroVector,
  DimensionMismatch,
  Breakdown,
  InvalidK,
  TooFewPaired,
  TooFewSamples,
  DegenerateBandwidth,
  EmptyClass,
  MissingLabels,
  MissingGraph,
  BadFamily,
  InvalidParameter,
  RatioInfeasible,
  EmptyTrainingSet,
  TooFewTrials,
  MissingFile,
  ShapeMismatch,
  ParseError,
  MissingResults,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit path) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace uspl
