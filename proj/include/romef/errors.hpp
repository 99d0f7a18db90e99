#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace romef {

/// Invalid user input: configuration, command line, artifact mismatch.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver divergence, NaNs, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, std::vector<double> residuals)
      : NumericalError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& field, double t)
      : NumericalError("non-finite values in " + field + " at t = " + std::to_string(t)), field_(field), t_(t) {}
  const std::string& field() const { return field_; }
  double time() const { return t_; }

 private:
  std::string field_;
  double t_;
};

/// Stored artifact does not belong to the mesh or basis it is used with.
class FingerprintError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed or truncated binary artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace romef
