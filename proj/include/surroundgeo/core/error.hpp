#pragma once

#include <stdexcept>
#include <string>

namespace surroundgeo {

enum class ErrorCode {
  DomainError,            // input outside the mathematical domain of an operation
  InsufficientData,       // too few measurements to evaluate or solve
  DegenerateGeometry,     // rank-deficient / unsolvable configuration
  NumericFailure,         // NaN or divergence during optimization
  NoConsensus,            // robust estimation found no acceptable inlier set
  InsufficientExcitation, // motion does not constrain the requested parameters
  GaugeNotFixed,          // optimization started without a gauge anchor
  InfeasibleKnots,        // knot vector cannot support the requested fit
  MinSpeedViolation,      // trajectory derivative below the configured speed floor
  GimbalDegenerate,       // velocity parallel to the vertical axis
  ScaleBreak,             // scale propagation chain interrupted
  IoError,                // malformed or unreadable file
  UsageError              // bad CLI invocation
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace surroundgeo
