#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kaplan {

enum class ErrorCode {
  // graph-core
  SelfLoop,
  NonpositiveMeasure,
  AsymmetricWeight,
  InvalidWeight,
  Disconnected,
  UnknownVertex,
  SupportTouchesBoundary,
  EmptyOriginSet,
  RadiusExhausted,
  ProfileTooShort,
  NotWeaklySphericallySymmetric,
  // generators
  ZeroBranching,
  BadParameter,
  // nonlinearity
  BracketNotFound,
  BelowThreshold,
  ParseError,
  // barriers
  BadDelta,
  NonpositiveArgument,
  SeriesDivergent,
  TailUnbounded,
  SupBranchingUnbounded,
  ATooSmall,
  NonpositiveK,
  ConditionFailed,
  // criteria
  NegativeDatum,
  HypothesisViolated,
  BarrierConstructionFailed,
  // simulator
  NaNDetected,
  InvariantViolated,
  TooFewSamples,
  // pipeline
  ConfigInvalid,
  StageFailed,
  IoFailure,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code plus optional detail items
/// (failed hypothesis names, failed certificate clauses, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace kaplan
