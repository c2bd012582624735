#include "powerarb/error.hpp"

namespace powerarb {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kGapInTimestamps: return "GapInTimestamps";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kInvalidLagSpec: return "InvalidLagSpec";
    case ErrorCode::kLagExceedsHistory: return "LagExceedsHistory";
    case ErrorCode::kInsufficientHistory: return "InsufficientHistory";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kNonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIncompleteHour: return "IncompleteHour";
    case ErrorCode::kInvalidOrder: return "InvalidOrder";
    case ErrorCode::kVolumeExceedsFeasibility: return "VolumeExceedsFeasibility";
    case ErrorCode::kInfeasiblePostTradePosition: return "InfeasiblePostTradePosition";
    case ErrorCode::kWrongArity: return "WrongArity";
    case ErrorCode::kEmptyBaselines: return "EmptyBaselines";
    case ErrorCode::kDoubleDaStep: return "DoubleDaStep";
    case ErrorCode::kDaStepMissing: return "DaStepMissing";
    case ErrorCode::kEpisodeDone: return "EpisodeDone";
    case ErrorCode::kPeriodOutOfRange: return "PeriodOutOfRange";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInsufficientReplay: return "InsufficientReplay";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInsufficientYears: return "InsufficientYears";
    case ErrorCode::kCoverageGap: return "CoverageGap";
  }
  return "Unknown";
}

}  // namespace powerarb
