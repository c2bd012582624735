#ifndef POWERARB_ERROR_HPP
#define POWERARB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace powerarb {

enum class ErrorCode {
  kIoError,
  kParseError,
  kMissingColumn,
  kGapInTimestamps,
  kNonFiniteValue,
  kInvalidRecord,
  kInvalidLagSpec,
  kLagExceedsHistory,
  kInsufficientHistory,
  kInvalidConfig,
  kUnknownKey,
  kDegenerateLabels,
  kNonFiniteFeature,
  kDimensionMismatch,
  kIncompleteHour,
  kInvalidOrder,
  kVolumeExceedsFeasibility,
  kInfeasiblePostTradePosition,
  kWrongArity,
  kEmptyBaselines,
  kDoubleDaStep,
  kDaStepMissing,
  kEpisodeDone,
  kPeriodOutOfRange,
  kNonFiniteLoss,
  kInsufficientReplay,
  kShapeMismatch,
  kInsufficientYears,
  kCoverageGap,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
// `subject` names the offending key, column, path or timestamp when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {})
      : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

  ErrorCode code() const { return code_; }
  const std::string& subject() const { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace powerarb

#endif  // POWERARB_ERROR_HPP
