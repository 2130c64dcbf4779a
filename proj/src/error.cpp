#include "difnet/error.hpp"

namespace difnet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_params: return "InvalidParams";
    case ErrorCode::not_connected: return "NotConnected";
    case ErrorCode::numerical_failure: return "NumericalFailure";
    case ErrorCode::no_root: return "NoRoot";
    case ErrorCode::invalid_count: return "InvalidCount";
    case ErrorCode::bad_list: return "BadList";
    case ErrorCode::stability_violation: return "StabilityViolation";
    case ErrorCode::divergence: return "Divergence";
    case ErrorCode::not_converged: return "NotConverged";
    case ErrorCode::dimension_overflow: return "DimensionOverflow";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::eta_too_small: return "EtaTooSmall";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Error";
}

}  // namespace difnet
