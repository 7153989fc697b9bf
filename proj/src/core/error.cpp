#include "surroundgeo/core/error.hpp"

namespace surroundgeo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "domain_error";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::NumericFailure: return "numeric_failure";
    case ErrorCode::NoConsensus: return "no_consensus";
    case ErrorCode::InsufficientExcitation: return "insufficient_excitation";
    case ErrorCode::GaugeNotFixed: return "gauge_not_fixed";
    case ErrorCode::InfeasibleKnots: return "infeasible_knots";
    case ErrorCode::MinSpeedViolation: return "min_speed_violation";
    case ErrorCode::GimbalDegenerate: return "gimbal_degenerate";
    case ErrorCode::ScaleBreak: return "scale_break";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::UsageError: return "usage_error";
  }
  return "unknown";
}

}  // namespace surroundgeo
