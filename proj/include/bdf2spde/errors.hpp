#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bdf2spde {

/// Operand sizes do not agree (vector vs. matrix, state vs. space).
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& where, std::size_t expected, std::size_t got)
      : std::invalid_argument(where + ": dimension mismatch (expected " +
                              std::to_string(expected) + ", got " + std::to_string(got) + ")") {}
};

/// A zero pivot showed up during tridiagonal elimination.
class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(std::size_t row)
      : std::runtime_error("singular tridiagonal system: zero pivot in row " + std::to_string(row)),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Newton residual still above tolerance after the maximum iteration count.
class NewtonNonconvergence : public std::runtime_error {
 public:
  NewtonNonconvergence(double residual, int iterations)
      : std::runtime_error("Newton iteration did not converge: residual " + std::to_string(residual) +
                           " after " + std::to_string(iterations) + " iterations"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A time step failed; carries the (1-based) step index.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(std::size_t step, const std::string& cause)
      : std::runtime_error("time step " + std::to_string(step) + " failed: " + cause), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Invalid experiment configuration; `key()` names the offending option.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace bdf2spde
