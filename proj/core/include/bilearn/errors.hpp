#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bilearn {

/// Coarse error categories surfaced by the CLI on its diagnostic stream.
enum class ErrorCategory { config, data, convergence, rank_deficiency };

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::convergence: return "convergence";
    case ErrorCategory::rank_deficiency: return "rank-deficiency";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

/// Malformed or out-of-range configuration; carries the offending key in the message.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Bad runtime inputs: dimension mismatches, non-finite values, degenerate data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Operator numerically rank deficient where an inverse of A^T A is required.
class RankDeficiencyError : public Error {
 public:
  explicit RankDeficiencyError(const std::string& what)
      : Error(ErrorCategory::rank_deficiency, what) {}
};

/// Iteration budget exhausted before the gradient tolerance was met.
/// Carries the best iterate seen so that callers can diagnose the failure.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd best_iterate, double grad_norm,
                   long iterations)
      : Error(ErrorCategory::convergence, what),
        best_iterate_(std::move(best_iterate)),
        grad_norm_(grad_norm),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const { return best_iterate_; }
  double grad_norm() const { return grad_norm_; }
  long iterations() const { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double grad_norm_;
  long iterations_;
};

}  // namespace bilearn
