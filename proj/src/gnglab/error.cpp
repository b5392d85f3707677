#include "gnglab/error.hpp"

namespace gnglab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Config: return "config";
    case ErrorCode::UnboundedVelocity: return "unbounded_velocity";
    case ErrorCode::IntegrationFailure: return "integration_failure";
    case ErrorCode::Escaped: return "escaped";
    case ErrorCode::Coverage: return "coverage";
    case ErrorCode::Inapplicable: return "inapplicable";
    case ErrorCode::Bracket: return "bracket";
    case ErrorCode::NonRotating: return "non_rotating";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace gnglab
