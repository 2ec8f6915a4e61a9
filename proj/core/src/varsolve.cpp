#include "bilearn/varsolve.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>

#include "bilearn/errors.hpp"

namespace bilearn {

namespace {

// Eigenvalues of the 1-D Neumann Laplacian K^T K for the first-difference map:
// l_k = 2 - 2 cos(pi k / n), shared by the DCT-II basis.
Eigen::VectorXd neumann_laplacian_spectrum(Eigen::Index n) {
  const double pi = std::acos(-1.0);
  Eigen::VectorXd l(n);
  for (Eigen::Index k = 0; k < n; ++k) l[k] = 2.0 - 2.0 * std::cos(pi * k / n);
  return l;
}

// True when the regularizer's quadratic form is diagonal in the operator's
// DCT basis: Tikhonov, or generalized Tikhonov with the identity map or the
// image-gradient map at the operator's side length.
bool spectral_compatible(const ForwardOperator& op, const Regularizer& reg) {
  if (!op.has_spectral_factorization()) return false;
  if (reg.kind() == Regularizer::Kind::tikhonov) return true;
  if (reg.kind() != Regularizer::Kind::generalized_tikhonov) return false;
  const LinearMap* k = reg.map();
  if (k->preset() == LinearMap::Preset::identity) return k->cols() == op.cols();
  if (k->preset() == LinearMap::Preset::image_gradient_2d) return k->side() == op.conv_side();
  return false;
}

ReconstructionResult solve_spectral_quadratic(const LowerLevelProblem& p) {
  const ForwardOperator& op = p.op;
  const Eigen::Index s = op.conv_side();
  const Eigen::VectorXd& lam = op.conv_spectrum_1d();

  Eigen::VectorXd l;  // eigenvalues of K^T K on the DCT grid, or all-ones
  bool laplacian = false;
  if (p.reg.kind() == Regularizer::Kind::generalized_tikhonov &&
      p.reg.map()->preset() == LinearMap::Preset::image_gradient_2d) {
    l = neumann_laplacian_spectrum(s);
    laplacian = true;
  }

  Eigen::VectorXd coef = op.dct2(p.y);
  for (Eigen::Index c = 0; c < s; ++c) {
    for (Eigen::Index r = 0; r < s; ++r) {
      const double a = lam[r] * lam[c];
      const double k = laplacian ? l[r] + l[c] : 1.0;
      coef[c * s + r] = a * coef[c * s + r] / (a * a + p.alpha * k);
    }
  }

  ReconstructionResult res;
  res.x = op.idct2(coef);
  res.used_closed_form = true;
  // The gradient of F_alpha is available exactly in the same basis.
  Eigen::VectorXd grad = op.dct2(res.x);
  Eigen::VectorXd ydct = op.dct2(p.y);
  for (Eigen::Index c = 0; c < s; ++c) {
    for (Eigen::Index r = 0; r < s; ++r) {
      const double a = lam[r] * lam[c];
      const double k = laplacian ? l[r] + l[c] : 1.0;
      grad[c * s + r] = (a * a + p.alpha * k) * grad[c * s + r] - a * ydct[c * s + r];
    }
  }
  res.grad_norm = grad.norm();
  return res;
}

ReconstructionResult solve_dense_quadratic(const LowerLevelProblem& p) {
  const Eigen::MatrixXd& a = p.op.matrix();
  Eigen::MatrixXd h = a.transpose() * a;
  if (p.reg.kind() == Regularizer::Kind::tikhonov) {
    h.diagonal().array() += p.alpha;
  } else {
    h += p.alpha * p.reg.map()->gram();
  }
  const Eigen::VectorXd aty = a.transpose() * p.y;
  ReconstructionResult res;
  res.x = Eigen::LLT<Eigen::MatrixXd>(h).solve(aty);
  res.used_closed_form = true;
  res.grad_norm = p.gradient(res.x).norm();
  return res;
}

// Damped Newton with Armijo backtracking. F_alpha is strictly convex
// (A^T A is positive definite for injective A), so the Newton system is
// solvable and the method is globally convergent with a line search.
//
// At extreme curvatures (alpha / gamma beyond ~1e12) the gradient cannot be
// evaluated below its round-off floor, so the iteration also stops once two
// consecutive accepted steps are at the floating-point resolution of the
// iterate; grad_norm then reports the achieved value.
ReconstructionResult solve_newton(const LowerLevelProblem& p, const SolveOptions& opt,
                                  Eigen::VectorXd x, double tol) {
  const Eigen::MatrixXd& a = p.op.matrix();
  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::VectorXd aty = a.transpose() * p.y;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  ReconstructionResult res;
  double f = p.objective(x);
  if (opt.trace_objective) res.objective_trace.push_back(f);

  Eigen::VectorXd grad = ata * x - aty + p.alpha * p.reg.gradient(x);
  double gn = grad.norm();
  Eigen::VectorXd best_x = x;
  double best_gn = gn;

  long it = 0;
  int resolution_limited_steps = 0;
  while (gn > tol) {
    if (it >= opt.max_iterations) {
      throw ConvergenceError("lower-level solve: iteration budget exhausted (|grad| = " +
                                 std::to_string(best_gn) + ")",
                             best_x, best_gn, it);
    }
    ++it;

    Eigen::MatrixXd h = ata + p.alpha * p.reg.hessian(x);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    Eigen::VectorXd step =
        llt.info() == Eigen::Success ? llt.solve(grad).eval() : (grad / h.norm()).eval();
    const double slope = grad.dot(step);

    double t = 1.0;
    Eigen::VectorXd xn;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      xn = x - t * step;
      fn = p.objective(xn);
      if (fn <= f - 1e-4 * t * slope) break;
      t *= 0.5;
    }
    const double moved = t * step.norm();
    x = std::move(xn);
    f = fn;
    if (opt.trace_objective) res.objective_trace.push_back(f);

    grad = ata * x - aty + p.alpha * p.reg.gradient(x);
    gn = grad.norm();
    if (gn < best_gn) {
      best_gn = gn;
      best_x = x;
    }

    if (moved <= 4.0 * eps * (1.0 + x.norm())) {
      if (++resolution_limited_steps >= 2) {
        x = best_x;
        gn = best_gn;
        break;
      }
    } else {
      resolution_limited_steps = 0;
    }
  }

  res.x = std::move(x);
  res.grad_norm = gn;
  res.iterations = it;
  return res;
}

// Gradient descent with backtracking; fallback for operators without a dense
// matrix, where Hessians are not materialized. Shares the floating-point
// stagnation safeguard with the Newton path.
ReconstructionResult solve_gradient_descent(const LowerLevelProblem& p, const SolveOptions& opt,
                                            Eigen::VectorXd x, double tol) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  ReconstructionResult res;
  double f = p.objective(x);
  if (opt.trace_objective) res.objective_trace.push_back(f);

  Eigen::VectorXd grad = p.gradient(x);
  double gn = grad.norm();
  Eigen::VectorXd best_x = x;
  double best_gn = gn;
  double step0 = 1.0;

  long it = 0;
  int resolution_limited_steps = 0;
  while (gn > tol) {
    if (it >= opt.max_iterations) {
      throw ConvergenceError("lower-level solve: iteration budget exhausted (|grad| = " +
                                 std::to_string(best_gn) + ")",
                             best_x, best_gn, it);
    }
    ++it;

    double t = step0;
    Eigen::VectorXd xn;
    double fn = 0.0;
    const double g2 = gn * gn;
    for (int bt = 0; bt < 200; ++bt) {
      xn = x - t * grad;
      fn = p.objective(xn);
      if (fn <= f - 1e-4 * t * g2) break;
      t *= 0.5;
    }
    // Reuse the accepted step as the next trial, allowing mild growth.
    step0 = 2.0 * t;
    const double moved = t * gn;
    x = std::move(xn);
    f = fn;
    if (opt.trace_objective) res.objective_trace.push_back(f);
    grad = p.gradient(x);
    gn = grad.norm();
    if (gn < best_gn) {
      best_gn = gn;
      best_x = x;
    }

    if (moved <= 4.0 * eps * (1.0 + x.norm())) {
      if (++resolution_limited_steps >= 2) {
        x = best_x;
        gn = best_gn;
        break;
      }
    } else {
      resolution_limited_steps = 0;
    }
  }

  res.x = std::move(x);
  res.grad_norm = gn;
  res.iterations = it;
  return res;
}

}  // namespace

LowerLevelProblem::LowerLevelProblem(ForwardOperator op_, Regularizer reg_, Eigen::VectorXd y_,
                                     double alpha_)
    : op(std::move(op_)), reg(std::move(reg_)), y(std::move(y_)), alpha(alpha_) {
  if (!op.is_injective()) {
    throw RankDeficiencyError("lower-level problem requires an injective operator");
  }
  if (y.size() != op.rows()) throw DataError("lower-level problem: measurement dimension mismatch");
  if (!y.allFinite()) throw DataError("lower-level problem: non-finite measurement");
  if (!(alpha >= 0.0)) throw DataError("lower-level problem: alpha must be non-negative");
}

double LowerLevelProblem::objective(const Eigen::VectorXd& x) const {
  const double datafit = 0.5 * (op.apply(x) - y).squaredNorm();
  return alpha == 0.0 ? datafit : datafit + alpha * reg.eval(x);
}

Eigen::VectorXd LowerLevelProblem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = op.apply_adjoint(op.apply(x) - y);
  if (alpha != 0.0) g += alpha * reg.gradient(x);
  return g;
}

ReconstructionResult solve(const LowerLevelProblem& problem, const SolveOptions& options,
                           const Eigen::VectorXd* warm_start) {
  if (problem.alpha == 0.0) {
    ReconstructionResult res;
    res.x = problem.op.least_squares_solution(problem.y);
    res.used_closed_form = true;
    res.grad_norm = problem.gradient(res.x).norm();
    return res;
  }

  if (problem.reg.is_quadratic()) {
    if (spectral_compatible(problem.op, problem.reg)) return solve_spectral_quadratic(problem);
    if (problem.op.has_dense_matrix()) return solve_dense_quadratic(problem);
    throw ConfigError("quadratic solve: unsupported operator/regularizer combination");
  }

  const double tol =
      options.grad_tol * (1.0 + problem.op.apply_adjoint(problem.y).norm());
  Eigen::VectorXd x0 =
      warm_start ? *warm_start : problem.op.least_squares_solution(problem.y);
  if (x0.size() != problem.op.cols()) throw DataError("solve: warm start dimension mismatch");

  if (problem.op.has_dense_matrix()) {
    return solve_newton(problem, options, std::move(x0), tol);
  }
  return solve_gradient_descent(problem, options, std::move(x0), tol);
}

double verify_optimality_identity(const LowerLevelProblem& problem,
                                  const ReconstructionResult& result) {
  if (!(problem.alpha > 0.0)) {
    throw DataError("verify_optimality_identity requires alpha > 0");
  }
  const Eigen::VectorXd x0 = problem.op.least_squares_solution(problem.y);
  const Eigen::VectorXd ata_x0 = problem.op.apply_adjoint(problem.op.apply(x0));
  const Eigen::VectorXd ata_xa = problem.op.apply_adjoint(problem.op.apply(result.x));
  const Eigen::VectorXd residual =
      problem.alpha * problem.reg.gradient(result.x) - (ata_x0 - ata_xa);
  return residual.norm() / (1.0 + ata_x0.norm());
}

std::vector<BoundaryProbePoint> boundary_continuity_probe(const ForwardOperator& op,
                                                          const Regularizer& reg,
                                                          const Eigen::VectorXd& y,
                                                          std::span<const double> alphas,
                                                          const SolveOptions& options) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw DataError("boundary probe: alphas must be strictly positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) {
      throw DataError("boundary probe: alphas must be strictly decreasing");
    }
  }
  const Eigen::VectorXd x0 = op.least_squares_solution(y);
  std::vector<BoundaryProbePoint> out;
  out.reserve(alphas.size());
  Eigen::VectorXd warm = x0;
  for (double alpha : alphas) {
    LowerLevelProblem p(op, reg, y, alpha);
    ReconstructionResult r = solve(p, options, &warm);
    warm = r.x;
    const double d = (r.x - x0).norm();
    out.push_back({alpha, d, d * d / alpha});
  }
  return out;
}

}  // namespace bilearn
