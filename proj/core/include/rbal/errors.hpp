#ifndef RBAL_ERRORS_HPP
#define RBAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rbal {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or constraint violation detected before any work runs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV imports, label ranges, non-finite
// features).
class DataError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions between caller inputs and a model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numerical failure that survived the usual jitter/ridge fallbacks.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A smoothed latent-state marginal collapsed to zero everywhere: the observed
// inspection labels cannot be reconciled with the transition model.
class EvidenceConflictError : public NumericError {
 public:
  EvidenceConflictError(const std::string& what, int step)
      : NumericError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace rbal

#endif  // RBAL_ERRORS_HPP
