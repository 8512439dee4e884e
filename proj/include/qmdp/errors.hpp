#pragma once

#include <stdexcept>
#include <string>

namespace qmdp {

/// Configuration / schema violations (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver hit its iteration cap (CLI exit code 3).
struct ConvergenceError : std::runtime_error {
  double last_residual;
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), last_residual(residual) {}
};

/// A supplied certificate (drift, minorization, sizing) is inconsistent
/// with what the operation requires.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reference solution failed its self-consistency gate (CLI exit code 4).
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested construction exceeds a configured resource cap.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace qmdp
