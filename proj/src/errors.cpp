#include "levytail/errors.hpp"

namespace levytail {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ModelParse: return "ModelParse";
    case ErrorCode::DivergentLevyMeasure: return "DivergentLevyMeasure";
    case ErrorCode::EmptyTail: return "EmptyTail";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::ClampExceeded: return "ClampExceeded";
    case ErrorCode::SeriesDiverges: return "SeriesDiverges";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NotAbsolutelyIntegrable: return "NotAbsolutelyIntegrable";
    case ErrorCode::ZeroCrossing: return "ZeroCrossing";
    case ErrorCode::PhaseStepTooLarge: return "PhaseStepTooLarge";
    case ErrorCode::TiltDiverges: return "TiltDiverges";
    case ErrorCode::WindowUnderflow: return "WindowUnderflow";
    case ErrorCode::ZeroPositiveMass: return "ZeroPositiveMass";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::GridInfeasible: return "GridInfeasible";
    case ErrorCode::CutoffRequired: return "CutoffRequired";
    case ErrorCode::DensityUnderflow: return "DensityUnderflow";
    case ErrorCode::HypothesisCheckFailed: return "HypothesisCheckFailed";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace levytail
