#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skel {

enum class ErrorKind {
  domain,
  admissibility,
  model_consistency,
  convergence,
  spectral,
  io,
  parse,
  validation,
  construction,
  insufficient_signal,
  degenerate_input,
  invariant_violation,
  internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit status for an error class (see README for the table).
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// A map left its declared state space; `step` is the recurrence index when known.
class ModelConsistencyError : public Error {
 public:
  ModelConsistencyError(const std::string& message, std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual, std::size_t iterations);
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

}  // namespace skel
