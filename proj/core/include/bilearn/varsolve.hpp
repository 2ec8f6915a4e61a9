#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"

namespace bilearn {

/// Stand-in for the alpha = infinity endpoint of the parameter domain.
inline constexpr double kInfinityProxy = 1e7;

struct SolveOptions {
  /// Relative first-order tolerance: stop when |grad F| <= grad_tol * (1 + |A^T y|).
  double grad_tol = 1e-10;
  long max_iterations = 100000;
  /// When set, the per-iteration objective values are recorded in the result.
  bool trace_objective = false;
};

/// The variational problem F_alpha(x) = 0.5 |A x - y|^2 + alpha R(x).
/// Construction checks injectivity of the operator and alpha >= 0.
struct LowerLevelProblem {
  LowerLevelProblem(ForwardOperator op, Regularizer reg, Eigen::VectorXd y, double alpha);

  ForwardOperator op;
  Regularizer reg;
  Eigen::VectorXd y;
  double alpha;

  double objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

struct ReconstructionResult {
  Eigen::VectorXd x;
  double grad_norm = 0.0;
  long iterations = 0;
  bool used_closed_form = false;
  std::vector<double> objective_trace;  // filled only when requested
};

/// Minimizes F_alpha. alpha = 0 returns the least-squares solution; quadratic
/// regularizers are solved in closed form (dense factorization, or exactly in
/// the DCT domain for separable convolutions); the Huber family is solved by
/// damped Newton with Armijo backtracking, warm-started at `warm_start` when
/// provided and at the least-squares solution otherwise.
/// Throws ConvergenceError (carrying the best iterate) if the iteration
/// budget is exhausted before the tolerance is met.
ReconstructionResult solve(const LowerLevelProblem& problem, const SolveOptions& options = {},
                           const Eigen::VectorXd* warm_start = nullptr);

/// Residual of the first-order optimality identity
///   alpha grad R(x^alpha) = A^T A x0 - A^T A x^alpha,
/// normalized by 1 + |A^T A x0|. Small values certify the solve.
/// Requires alpha > 0.
double verify_optimality_identity(const LowerLevelProblem& problem,
                                  const ReconstructionResult& result);

struct BoundaryProbePoint {
  double alpha;
  double distance_to_x0;          // |x^alpha - x0|
  double distance_sq_over_alpha;  // |x0 - x^alpha|^2 / alpha
};

/// Diagnostic for the alpha -> 0 boundary: solves along a decreasing positive
/// sequence and reports |x^alpha - x0| and |x0 - x^alpha|^2 / alpha, both of
/// which must vanish as alpha -> 0.
std::vector<BoundaryProbePoint> boundary_continuity_probe(const ForwardOperator& op,
                                                          const Regularizer& reg,
                                                          const Eigen::VectorXd& y,
                                                          std::span<const double> alphas,
                                                          const SolveOptions& options = {});

}  // namespace bilearn
