#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bilearn/bilevel.hpp"
#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"
#include "bilearn/varsolve.hpp"

namespace bilearn {

/// The standard ten-ellipse head phantom rasterized at side x side over
/// [-1, 1]^2 (cell-center sampling, column-major, values clipped to [0, 1]).
Eigen::VectorXd generate_shepp_logan(Eigen::Index side);

/// Deterministic Gaussian sampler: Box-Muller over mt19937_64, so a seed
/// fully determines the stream on a given platform.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double next();

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Axis-aligned scan domain.
struct ScanDomain {
  double x1_lo = -1.6, x1_hi = 1.6;
  double x2_lo = -1.6, x2_hi = 1.6;
};

/// A 2-D scan over candidate reconstruction-space points x0: each grid cell
/// center becomes a measurement y = A x0 paired with the fixed ground truth,
/// and the condition checkers plus a full bilevel grid search run on it.
struct RegionScanSpec {
  ScanDomain domain;
  int resolution = 100;
  Eigen::Vector2d ground_truth{1.0, 0.5};
  ForwardOperator op = ForwardOperator::identity(2);
  Regularizer reg = Regularizer::tikhonov();
  AlphaGrid grid = AlphaGrid::log_default();
  UpperLevelKind upper = UpperLevelKind::mse;
  SolveOptions solve;
  int workers = 0;  // 0 = hardware concurrency
};

struct RegionCell {
  double x1 = 0.0, x2 = 0.0;
  std::optional<bool> old_ok;   // denoising only
  bool new_ok = false;
  std::optional<bool> pred_ok;  // invertible operators only
  double alpha_hat = 0.0;
  double cost_at_alpha_hat = 0.0;
  double cost_at_zero = 0.0;
  bool valid = true;
  /// Bitwise-constant cost curve: the argmin carries no information, so the
  /// cell is excluded from the alpha_hat = 0 area accounting.
  bool flat_curve = false;
};

struct RegionScanResult {
  int resolution = 0;
  double cell_area = 0.0;
  std::vector<RegionCell> cells;  // row-major over (i1, i2)

  double area_zero = 0.0;
  double area_new_violated = 0.0;
  std::optional<double> area_old_violated;

  bool zero_touches_boundary = false;
  bool new_touches_boundary = false;
  bool old_touches_boundary = false;

  std::size_t invalid_cells = 0;
};

/// Runs the scan; per-cell solver failures mark the cell invalid and the scan
/// continues, but more than 1% invalid cells aborts with ConvergenceError.
RegionScanResult run_region_scan(const RegionScanSpec& spec);

struct AreaRatioRow {
  std::string problem;      // e.g. "denoising"
  std::string regularizer;  // e.g. "tikhonov"
  std::string condition;    // "new" | "old"
  std::optional<double> ratio;  // violated area / zero area, 3 decimals; n/a when undefined
  bool truncated = false;       // region touches the scan boundary
};

/// Ratio between the area where the condition is violated and the area where
/// the learned parameter is 0; values close to 1 mean the condition nearly
/// characterizes positivity.
std::vector<AreaRatioRow> compute_area_ratios(const RegionScanResult& result,
                                              const std::string& problem_label,
                                              const std::string& regularizer_label);

/// Monte-Carlo denoising study: perturbs the ground truth with componentwise
/// Gaussian noise and learns alpha on the empirical-mean MSE cost.
struct NoiseStudySpec {
  Eigen::VectorXd ground_truth = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
  int sample_count = 1000;
  Eigen::VectorXd noise_mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd noise_stddev = (Eigen::VectorXd(2) << 0.1, 0.1).finished();
  Regularizer reg = Regularizer::elastic_huber(0.01, 0.01);
  AlphaGrid grid = AlphaGrid::linear(0.0, 0.1, 50);
  std::uint64_t seed = 0;
  SolveOptions solve;
};

struct NoiseStudyResult {
  BilevelSolution solution;
  Dataset data;
};

NoiseStudyResult run_noise_study(const NoiseStudySpec& spec);

/// The desk-scale deblurring experiment: a side x side phantom, separable
/// Gaussian blur, additive Gaussian noise, quadratic gradient regularizer,
/// and a grid search for each upper-level cost.
struct LargeScaleSpec {
  Eigen::Index side = 128;
  double blur_sigma = 0.05;  // in units where the image occupies [0,1]^2
  double noise_scale = 0.1;  // noise stddev = noise_scale * |A x_true|, spread over components
  /// When true (default), the per-component stddev is noise_scale*|Ax|/sqrt(m)
  /// so the total noise energy is about (noise_scale*|Ax|)^2; when false the
  /// scale is applied per component literally.
  bool spread_noise = true;
  std::uint64_t seed = 0;
  AlphaGrid grid = AlphaGrid::log_default();
  SolveOptions solve{.grad_tol = 1e-8, .max_iterations = 5000};
  double sigma_tol_rel = 1e-14;
};

struct LargeScaleRun {
  BilevelSolution solution;
  Eigen::VectorXd reconstruction;  // at alpha_hat
};

struct LargeScaleResult {
  Eigen::VectorXd phantom;
  Eigen::VectorXd measurement;
  LargeScaleRun mse;
  LargeScaleRun predictive;
};

LargeScaleResult run_large_scale(const LargeScaleSpec& spec);

}  // namespace bilearn
