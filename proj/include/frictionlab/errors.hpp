#pragma once

#include <stdexcept>
#include <string>

namespace frictionlab {

/// Machine-readable error codes surfaced by the CLI as structured JSON.
enum class ErrorCode {
    InvalidArgument,
    NonConvexTabulation,
    InvalidPrice,
    NotDifferentiable,
    ConjugateDiverged,
    ShapeMismatch,
    BetaOutOfRange,
    ExplosiveStep,
    EmbeddingNotPSD,
    CertificateInvalid,
    PlanInfeasibleForClaim,
    PlanNotFlat,
    NegativePrices,
    InvariantViolation,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace frictionlab
