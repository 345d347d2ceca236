#pragma once

#include <stdexcept>
#include <string>

namespace wcsafe {

/// Inconsistent dimensions between operands (matrix/vector/state sizes).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Linear solve hit a pivot below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine (Jacobi sweep, Riccati recursion, Lyapunov series)
/// failed to converge within its cap.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// One of the certificate definiteness conditions failed.
/// `condition` names the failed check, `min_eigenvalue` is its worst margin.
class CertificateViolation : public std::runtime_error {
 public:
  CertificateViolation(const std::string& condition, double min_eigenvalue)
      : std::runtime_error("certificate violation: " + condition +
                           " (min eigenvalue " + std::to_string(min_eigenvalue) + ")"),
        condition_(condition),
        min_eigenvalue_(min_eigenvalue) {}

  const std::string& condition() const { return condition_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::string condition_;
  double min_eigenvalue_;
};

/// Malformed or inconsistent run configuration. `key` is the offending entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Training produced a non-finite loss or weight; the run must halt.
class NumericBlowupError : public std::runtime_error {
 public:
  explicit NumericBlowupError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wcsafe
