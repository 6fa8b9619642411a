#pragma once

#include <stdexcept>
#include <string>

namespace levytail {

enum class ErrorCode {
  InvalidInput,
  InvalidParams,
  InvalidGrid,
  ModelParse,
  DivergentLevyMeasure,
  EmptyTail,
  GridTooCoarse,
  IncompatibleGrids,
  TruncationInsufficient,
  ClampExceeded,
  SeriesDiverges,
  QuadratureFailure,
  NotAbsolutelyIntegrable,
  ZeroCrossing,
  PhaseStepTooLarge,
  TiltDiverges,
  WindowUnderflow,
  ZeroPositiveMass,
  HypothesisViolated,
  GridInfeasible,
  CutoffRequired,
  DensityUnderflow,
  HypothesisCheckFailed,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code; the CLI
// maps codes onto its exit-status contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace levytail
