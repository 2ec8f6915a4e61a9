#pragma once

#include <memory>

#include <Eigen/Core>

namespace bilearn {

/// A linear map K used inside generalized regularizers. Presets cover the
/// maps used throughout: the identity, the 1-D first-difference matrix
/// (rows [.. 1 -1 ..], so n = 2 gives the single row [1 -1]), and the 2-D
/// image gradient (stacked horizontal and vertical forward differences with
/// replicate boundary, so constant images map to zero).
class LinearMap {
 public:
  enum class Preset { identity, first_difference_1d, image_gradient_2d, dense };

  static LinearMap identity(Eigen::Index n);
  static LinearMap first_difference(Eigen::Index n);
  static LinearMap image_gradient(Eigen::Index side);
  static LinearMap dense(Eigen::MatrixXd k);

  Preset preset() const { return preset_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index side() const { return side_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& z) const;

  /// Dense K^T K; intended for small problems where Newton or direct
  /// quadratic solves materialize the Hessian.
  Eigen::MatrixXd gram() const;

 private:
  LinearMap() = default;
  Preset preset_ = Preset::identity;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::Index side_ = 0;   // image_gradient_2d only
  std::shared_ptr<const Eigen::MatrixXd> k_;  // dense only
};

/// Convex differentiable regularizer family: Tikhonov 0.5|x|^2, generalized
/// Tikhonov 0.5|Kx|^2, Huber sum_i hub_gamma(x_i), generalized Huber
/// sum_i hub_gamma([Kx]_i), and the strictly convex elastic Huber
/// (beta/2)|x|^2 + sum_i hub_gamma(x_i), where
///   hub_gamma(s) = |s| - gamma/2   for |s| >= gamma,
///                  s^2 / (2 gamma) otherwise.
/// All evaluations are non-negative, gradients are continuous, and instances
/// are immutable and safe to share across threads.
class Regularizer {
 public:
  enum class Kind { tikhonov, generalized_tikhonov, huber, generalized_huber, elastic_huber };

  static Regularizer tikhonov();
  static Regularizer generalized_tikhonov(LinearMap k);
  static Regularizer huber(double gamma);
  static Regularizer generalized_huber(LinearMap k, double gamma);
  static Regularizer elastic_huber(double beta, double gamma);

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double beta() const { return beta_; }
  /// Present for the generalized kinds; null otherwise.
  const LinearMap* map() const { return map_ ? &*map_ : nullptr; }

  /// True when the gradient is affine, i.e. the lower-level problem has a
  /// closed-form solution (Tikhonov and generalized Tikhonov).
  bool is_quadratic() const {
    return kind_ == Kind::tikhonov || kind_ == Kind::generalized_tikhonov;
  }

  /// R(x) >= 0.
  double eval(const Eigen::VectorXd& x) const;

  /// The gradient of R at x.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Hessian of R at x, materialized densely (small problems only).
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  /// Bregman distance D_R(x, z) = R(x) - R(z) - <grad R(z), x - z>;
  /// non-negative up to round-off by convexity.
  double bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

  /// Linearization L_R(x, z) = R(z) + <grad R(z), x - z>; satisfies
  /// L_R(x, x) = R(x) and L_R(x, z) <= R(x). May be negative.
  double linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

  /// Symmetric Bregman distance D_R(x, z) + D_R(z, x), computed in the
  /// inner-product form <grad R(x) - grad R(z), x - z>.
  double symmetric_bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

 private:
  Regularizer() = default;
  Kind kind_ = Kind::tikhonov;
  double gamma_ = 0.0;
  double beta_ = 0.0;
  std::shared_ptr<const LinearMap> map_;
};

}  // namespace bilearn
