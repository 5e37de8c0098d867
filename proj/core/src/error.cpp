#include "skel/error.hpp"

namespace skel {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::admissibility: return "admissibility error";
    case ErrorKind::model_consistency: return "model-consistency error";
    case ErrorKind::convergence: return "convergence error";
    case ErrorKind::spectral: return "spectral error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::construction: return "construction error";
    case ErrorKind::insufficient_signal: return "insufficient-signal error";
    case ErrorKind::degenerate_input: return "degenerate-input error";
    case ErrorKind::invariant_violation: return "invariant violation";
    case ErrorKind::internal: return "internal consistency error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::model_consistency: return 3;
    case ErrorKind::convergence:
    case ErrorKind::spectral: return 4;
    case ErrorKind::io: return 5;
    default: return 1;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message) {}

ModelConsistencyError::ModelConsistencyError(const std::string& message, std::size_t step)
    : Error(ErrorKind::model_consistency, message), step_(step) {}

ConvergenceError::ConvergenceError(const std::string& message, double residual,
                                   std::size_t iterations)
    : Error(ErrorKind::convergence, message), residual_(residual), iterations_(iterations) {}

}  // namespace skel
