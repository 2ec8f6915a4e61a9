// Test-only independent oracles. Everything here recomputes expected values
// through a different route than the library (finite differences, bisection,
// dense scans, explicit inverses) so the tests stay meaningful.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Core>

#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"

namespace oracles {

/// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Explicit 2x2 inverse.
inline Eigen::Matrix2d inverse_2x2(const Eigen::Matrix2d& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Eigen::Matrix2d inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

/// Piecewise Huber value, kept separate from the library implementation.
inline double huber_value(double s, double gamma) {
  return std::abs(s) >= gamma ? std::abs(s) - 0.5 * gamma : s * s / (2.0 * gamma);
}

inline double huber_derivative(double s, double gamma) {
  if (s >= gamma) return 1.0;
  if (s <= -gamma) return -1.0;
  return s / gamma;
}

/// Root of the per-component denoising optimality equation
///   x - y + alpha hub'(x) = 0
/// by bisection; the left-hand side is strictly increasing in x.
inline double huber_prox_1d(double y, double alpha, double gamma, int iters = 200) {
  auto f = [&](double x) { return x - y + alpha * huber_derivative(x, gamma); };
  double lo = std::min(y, 0.0) - 1.0, hi = std::max(y, 0.0) + 1.0;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Dense scan of the closed-form Tikhonov denoising cost
///   J(alpha) = 0.5 | y/(1+alpha) - x |^2
/// over t = 1/(1+alpha) in [0, 1]; returns the minimizing alpha (inf proxy
/// 1e7 when the optimum sits at t = 0).
inline double tikhonov_denoising_scan(const Eigen::VectorXd& ground_truth,
                                      const Eigen::VectorXd& y, int steps = 2000001) {
  double best_cost = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0;
  for (int k = steps - 1; k >= 0; --k) {
    const double t = static_cast<double>(k) / (steps - 1);
    const double cost = 0.5 * (t * y - ground_truth).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_alpha = t == 0.0 ? 1e7 : 1.0 / t - 1.0;
    }
  }
  return best_alpha;
}

/// Materializes any operator as a dense matrix through basis applications.
inline Eigen::MatrixXd materialize(const bilearn::ForwardOperator& op) {
  Eigen::MatrixXd m(op.rows(), op.cols());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.cols());
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace oracles
