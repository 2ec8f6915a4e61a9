#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"
#include "bilearn/varsolve.hpp"

namespace bilearn {

/// One supervised sample: ground truth x and the measurement y it produced.
struct TrainingPair {
  Eigen::VectorXd ground_truth;
  Eigen::VectorXd measurement;
};

/// Non-empty list of training pairs; expectations in the upper level are
/// empirical means over the pairs.
struct Dataset {
  explicit Dataset(std::vector<TrainingPair> pairs);

  std::vector<TrainingPair> pairs;
  std::size_t size() const { return pairs.size(); }
};

/// Discretization of the parameter domain [0, inf]: strictly increasing,
/// starting exactly at 0, with a large finite proxy standing in for infinity.
class AlphaGrid {
 public:
  explicit AlphaGrid(std::vector<double> values);

  /// {0} + 98 log-spaced points between 1e-12 and 1e3 + the 1e7 proxy.
  static AlphaGrid log_default();
  /// Linear discretization of [lo, hi] into `count` points (lo must be 0).
  static AlphaGrid linear(double lo, double hi, int count);
  /// Grammar: "zero,log:-12:3:98,1e7" or "lin:0:0.1:50".
  static AlphaGrid parse(const std::string& spec);

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

enum class UpperLevelKind { mse, predictive_risk };

struct BilevelSolution {
  double alpha_hat = 0.0;
  double cost_at_alpha_hat = 0.0;
  std::vector<std::pair<double, double>> cost_curve;  // (alpha, cost)
  bool is_positive = false;
  bool at_infinity_proxy = false;

  /// True when every cost on the curve is bitwise identical, i.e. the data
  /// carry no information about alpha and the argmin is the whole grid.
  bool curve_is_flat() const;
};

/// Empirical upper-level cost at a single alpha:
///   mse:             (1/2K) sum_k |x^alpha(y_k) - x_k|^2
///   predictive risk: (1/2K) sum_k |A (x^alpha(y_k) - x_k)|^2
double upper_cost(UpperLevelKind kind, const Dataset& data, const ForwardOperator& op,
                  const Regularizer& reg, double alpha, const SolveOptions& options = {});

/// Evaluates the upper-level cost over the whole grid (one warm-started
/// ascending sweep per pair) and returns the minimizing alpha. Exact cost
/// ties are broken toward the smallest alpha.
BilevelSolution grid_search(UpperLevelKind kind, const Dataset& data, const ForwardOperator& op,
                            const Regularizer& reg, const AlphaGrid& grid,
                            const SolveOptions& options = {});

/// Closed-form optimal parameter for single-sample Tikhonov denoising:
///   alpha_bar = |y|^2 / <y, x> - 1.
/// May be negative; alpha_bar in (-1, 0] means the interior optimum is
/// absent with the cost minimized at alpha = 0, while alpha_bar <= -1
/// (negative inner product) pushes the optimum to the infinite end.
/// Throws DataError when |y| = 0 or <y, x> = 0.
double closed_form_tikhonov_alpha(const Eigen::VectorXd& ground_truth,
                                  const Eigen::VectorXd& y);

/// The heuristic condition R(x) < R(y); meaningful for denoising.
bool check_condition_old(const Regularizer& reg, const Eigen::VectorXd& ground_truth,
                         const Eigen::VectorXd& y);

/// The pointwise linearization condition
///   L_R((A^T A)^{-1} x, x0) < L_R((A^T A)^{-1} x0, x0),
/// which guarantees a strictly positive learned parameter.
bool check_condition_new_pointwise(const ForwardOperator& op, const Regularizer& reg,
                                   const Eigen::VectorXd& ground_truth, const Eigen::VectorXd& y);

/// Expectation form of the linearization condition (empirical means).
bool check_condition_new_expected(const ForwardOperator& op, const Regularizer& reg,
                                  const Dataset& data);

/// Samples the gradient-compatibility hypothesis
///   grad R((A^T A)^{-1} x^alpha) = grad R(x^alpha)
/// at the given alphas and pairs; true iff the maximal relative deviation is
/// <= 1e-8. Trivially true for the identity operator.
bool check_condition_gradient_compat(const ForwardOperator& op, const Regularizer& reg,
                                     std::span<const double> alphas, const Dataset& data,
                                     const SolveOptions& options = {});

/// Predictive-risk condition E[L_R(x, x0)] < E[R(x0)]; requires an
/// invertible (square injective) operator.
bool check_condition_predictive(const Regularizer& reg, const Dataset& data,
                                const ForwardOperator& op);

/// Zero-mean-noise denoising condition: the empirical mean of the symmetric
/// Bregman distance between measurement and ground truth is positive.
bool check_condition_symmetric_bregman(const Regularizer& reg, const Dataset& data);

/// Final difference quotient (J(alpha) - J(0)) / alpha along a decreasing
/// positive sequence; a numerical stand-in for the upper right Dini
/// derivative of the upper-level cost at 0.
double estimate_dini_derivative(UpperLevelKind kind, const Dataset& data,
                                const ForwardOperator& op, const Regularizer& reg,
                                std::span<const double> alphas, const SolveOptions& options = {});

}  // namespace bilearn
