#pragma once

#include <memory>

#include <Eigen/Core>

namespace bilearn {

/// Default relative threshold for the numerical injectivity test:
/// an operator counts as injective when sigma_min > tol * sigma_max.
inline constexpr double kDefaultSigmaTolRel = 1e-10;

/// Relative residual target for least-squares and normal-equation solves.
inline constexpr double kDefaultSolverTol = 1e-12;

/// A 1-D Gaussian kernel sampled at integer offsets, truncated and
/// renormalized to unit sum. `radius < 0` selects floor(4 * sigma).
Eigen::VectorXd gaussian_kernel_1d(double sigma, Eigen::Index radius = -1);

/// Immutable forward operator A with application, adjoint, least-squares
/// and normal-equation services. Three kinds are supported:
///   - identity:   x |-> x, exactly (no arithmetic is performed);
///   - dense:      an explicit m x n matrix, factorized at construction;
///   - separable-2D-convolution: a symmetric kernel applied along both axes
///     of a side x side image with symmetric (half-sample mirror) boundary
///     extension. This kind is diagonalized exactly by the orthonormal
///     DCT-II, which is what the solve services use.
///
/// Operators are value types over shared immutable state: cheap to copy and
/// safe to share across concurrent workers. All factorizations and singular
/// value bounds are computed at construction, never lazily.
class ForwardOperator {
 public:
  enum class Kind { identity, dense, separable_conv2d };

  static ForwardOperator identity(Eigen::Index n);
  static ForwardOperator dense(Eigen::MatrixXd a, double sigma_tol_rel = kDefaultSigmaTolRel);
  /// Separable Gaussian blur on a side x side image. `sigma_pixels` is the
  /// kernel standard deviation in pixels; `radius < 0` selects floor(4*sigma).
  static ForwardOperator gaussian_blur(Eigen::Index side, double sigma_pixels,
                                       Eigen::Index radius = -1,
                                       double sigma_tol_rel = kDefaultSigmaTolRel);

  Kind kind() const;
  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool is_square() const { return rows() == cols(); }

  /// y = A x. Throws DataError on dimension mismatch or non-finite input.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// w = A^T z.
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& z) const;

  /// The least-squares solution x0 with A^T A x0 = A^T y.
  /// Throws RankDeficiencyError when the operator is not injective.
  Eigen::VectorXd least_squares_solution(const Eigen::VectorXd& y) const;

  /// Solves (A^T A) v = w. Throws RankDeficiencyError when not injective.
  Eigen::VectorXd solve_normal_equations(const Eigen::VectorXd& w) const;

  double smallest_singular_value() const;
  double largest_singular_value() const;
  bool is_injective() const;

  /// Dense entries; available for identity and dense kinds only.
  const Eigen::MatrixXd& matrix() const;
  bool has_dense_matrix() const;

  // Spectral access for the convolution kind. The operator factorizes as
  // C^T diag(lambda_k lambda_l) C where C is the 2-D orthonormal DCT-II.
  bool has_spectral_factorization() const;
  Eigen::Index conv_side() const;
  /// Eigenvalues of the 1-D blur matrix under the DCT-II basis.
  const Eigen::VectorXd& conv_spectrum_1d() const;
  /// Forward/backward orthonormal 2-D DCT-II of a flattened side x side image.
  Eigen::VectorXd dct2(const Eigen::VectorXd& image) const;
  Eigen::VectorXd idct2(const Eigen::VectorXd& coefficients) const;

 private:
  struct Impl;
  explicit ForwardOperator(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace bilearn
