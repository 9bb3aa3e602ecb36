#include "kaplan/error.hpp"

namespace kaplan {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NonpositiveMeasure: return "NonpositiveMeasure";
    case ErrorCode::AsymmetricWeight: return "AsymmetricWeight";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::SupportTouchesBoundary: return "SupportTouchesBoundary";
    case ErrorCode::EmptyOriginSet: return "EmptyOriginSet";
    case ErrorCode::RadiusExhausted: return "RadiusExhausted";
    case ErrorCode::ProfileTooShort: return "ProfileTooShort";
    case ErrorCode::NotWeaklySphericallySymmetric: return "NotWeaklySphericallySymmetric";
    case ErrorCode::ZeroBranching: return "ZeroBranching";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::BracketNotFound: return "BracketNotFound";
    case ErrorCode::BelowThreshold: return "BelowThreshold";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::NonpositiveArgument: return "NonpositiveArgument";
    case ErrorCode::SeriesDivergent: return "SeriesDivergent";
    case ErrorCode::TailUnbounded: return "TailUnbounded";
    case ErrorCode::SupBranchingUnbounded: return "SupBranchingUnbounded";
    case ErrorCode::ATooSmall: return "ATooSmall";
    case ErrorCode::NonpositiveK: return "NonpositiveK";
    case ErrorCode::ConditionFailed: return "ConditionFailed";
    case ErrorCode::NegativeDatum: return "NegativeDatum";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::BarrierConstructionFailed: return "BarrierConstructionFailed";
    case ErrorCode::NaNDetected: return "NaNDetected";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StageFailed: return "StageFailed";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::vector<std::string>& details) {
  std::string out{to_string(code)};
  out += ": ";
  out += message;
  if (!details.empty()) {
    out += " [";
    for (std::size_t i = 0; i < details.size(); ++i) {
      if (i) out += "; ";
      out += details[i];
    }
    out += "]";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(compose(code, message, details)), code_(code), details_(std::move(details)) {}

}  // namespace kaplan
