#include "bilearn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bilearn/errors.hpp"

namespace bilearn {

double NormalSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on 53-bit uniforms; u1 is kept away from 0.
  const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::acos(-1.0) * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

RegionScanResult run_region_scan(const RegionScanSpec& spec) {
  if (spec.resolution < 8) throw ConfigError("region scan: resolution must be >= 8");
  if (!spec.op.is_square() || !spec.op.is_injective() || spec.op.cols() != 2) {
    throw DataError("region scan requires an invertible 2x2 operator");
  }
  const bool denoising = spec.op.kind() == ForwardOperator::Kind::identity;
  const int res = spec.resolution;
  const double w1 = (spec.domain.x1_hi - spec.domain.x1_lo) / res;
  const double w2 = (spec.domain.x2_hi - spec.domain.x2_lo) / res;
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw ConfigError("region scan: empty domain");

  const Eigen::VectorXd ground_truth = spec.ground_truth;

  RegionScanResult result;
  result.resolution = res;
  result.cell_area = w1 * w2;
  result.cells.resize(static_cast<std::size_t>(res) * res);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> invalid{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    const std::size_t total = result.cells.size();
    for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const int i = static_cast<int>(idx) / res;
      const int j = static_cast<int>(idx) % res;
      RegionCell cell;
      cell.x1 = spec.domain.x1_lo + (i + 0.5) * w1;
      cell.x2 = spec.domain.x2_lo + (j + 0.5) * w2;
      Eigen::VectorXd x0(2);
      x0 << cell.x1, cell.x2;
      try {
        const Eigen::VectorXd y = spec.op.apply(x0);
        if (denoising) cell.old_ok = check_condition_old(spec.reg, ground_truth, y);
        cell.new_ok = check_condition_new_pointwise(spec.op, spec.reg, ground_truth, y);
        Dataset single({TrainingPair{ground_truth, y}});
        cell.pred_ok = check_condition_predictive(spec.reg, single, spec.op);
        BilevelSolution sol =
            grid_search(spec.upper, single, spec.op, spec.reg, spec.grid, spec.solve);
        cell.alpha_hat = sol.alpha_hat;
        cell.cost_at_alpha_hat = sol.cost_at_alpha_hat;
        cell.cost_at_zero = sol.cost_curve.front().second;
        cell.flat_curve = sol.curve_is_flat();
      } catch (const ConvergenceError&) {
        cell.valid = false;
        invalid.fetch_add(1);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      result.cells[idx] = std::move(cell);
    }
  };

  std::size_t n_workers = spec.workers > 0
                              ? static_cast<std::size_t>(spec.workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, result.cells.size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  result.invalid_cells = invalid.load();
  if (result.invalid_cells * 100 > result.cells.size()) {
    throw ConvergenceError("region scan: more than 1% of cells failed to converge",
                           Eigen::VectorXd(), 0.0, 0);
  }

  for (std::size_t idx = 0; idx < result.cells.size(); ++idx) {
    const RegionCell& cell = result.cells[idx];
    if (!cell.valid) continue;
    const int i = static_cast<int>(idx) / res;
    const int j = static_cast<int>(idx) % res;
    const bool on_ring = i == 0 || j == 0 || i == res - 1 || j == res - 1;
    const bool is_zero = cell.alpha_hat == 0.0 && !cell.flat_curve;
    if (is_zero) {
      result.area_zero += result.cell_area;
      if (on_ring) result.zero_touches_boundary = true;
    }
    if (!cell.new_ok) {
      result.area_new_violated += result.cell_area;
      if (on_ring) result.new_touches_boundary = true;
    }
    if (cell.old_ok.has_value() && !*cell.old_ok) {
      result.area_old_violated = result.area_old_violated.value_or(0.0) + result.cell_area;
      if (on_ring) result.old_touches_boundary = true;
    }
  }
  if (denoising && !result.area_old_violated.has_value()) result.area_old_violated = 0.0;
  return result;
}

std::vector<AreaRatioRow> compute_area_ratios(const RegionScanResult& result,
                                              const std::string& problem_label,
                                              const std::string& regularizer_label) {
  auto rounded = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  std::vector<AreaRatioRow> rows;

  AreaRatioRow new_row{problem_label, regularizer_label, "new", std::nullopt,
                       result.new_touches_boundary || result.zero_touches_boundary};
  if (result.area_zero > 0.0) new_row.ratio = rounded(result.area_new_violated / result.area_zero);
  rows.push_back(std::move(new_row));

  AreaRatioRow old_row{problem_label, regularizer_label, "old", std::nullopt, false};
  if (result.area_old_violated.has_value() && result.area_zero > 0.0) {
    old_row.ratio = rounded(*result.area_old_violated / result.area_zero);
    old_row.truncated = result.old_touches_boundary || result.zero_touches_boundary;
  }
  rows.push_back(std::move(old_row));
  return rows;
}

NoiseStudyResult run_noise_study(const NoiseStudySpec& spec) {
  if (spec.sample_count < 1) throw ConfigError("noise study: sample count must be >= 1");
  const Eigen::Index n = spec.ground_truth.size();
  if (spec.noise_mean.size() != n || spec.noise_stddev.size() != n) {
    throw ConfigError("noise study: noise moments must match the ground-truth dimension");
  }
  if ((spec.noise_stddev.array() <= 0.0).any()) {
    throw ConfigError("noise study: noise standard deviations must be positive");
  }

  // Samples are drawn pair by pair, component by component, so a seed pins
  // the dataset exactly.
  NormalSampler sampler(spec.seed);
  std::vector<TrainingPair> pairs;
  pairs.reserve(spec.sample_count);
  for (int k = 0; k < spec.sample_count; ++k) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = spec.ground_truth[i] + spec.noise_mean[i] + spec.noise_stddev[i] * sampler.next();
    }
    pairs.push_back(TrainingPair{spec.ground_truth, std::move(y)});
  }
  Dataset data(std::move(pairs));

  const ForwardOperator op = ForwardOperator::identity(n);
  BilevelSolution sol = grid_search(UpperLevelKind::mse, data, op, spec.reg, spec.grid, spec.solve);
  return NoiseStudyResult{std::move(sol), std::move(data)};
}

LargeScaleResult run_large_scale(const LargeScaleSpec& spec) {
  if (spec.side < 16) throw ConfigError("large-scale: side must be >= 16");
  if (!(spec.blur_sigma > 0.0)) throw ConfigError("large-scale: blur sigma must be positive");
  if (spec.noise_scale < 0.0) throw ConfigError("large-scale: noise scale must be >= 0");

  LargeScaleResult result;
  result.phantom = generate_shepp_logan(spec.side);

  const double sigma_pixels = spec.blur_sigma * static_cast<double>(spec.side);
  const ForwardOperator op =
      ForwardOperator::gaussian_blur(spec.side, sigma_pixels, -1, spec.sigma_tol_rel);
  const Regularizer reg =
      Regularizer::generalized_tikhonov(LinearMap::image_gradient(spec.side));

  const Eigen::VectorXd blurred = op.apply(result.phantom);
  const double per_component =
      spec.spread_noise ? spec.noise_scale * blurred.norm() / std::sqrt(blurred.size())
                        : spec.noise_scale * blurred.norm();
  NormalSampler sampler(spec.seed);
  result.measurement = blurred;
  for (Eigen::Index i = 0; i < result.measurement.size(); ++i) {
    result.measurement[i] += per_component * sampler.next();
  }

  Dataset data({TrainingPair{result.phantom, result.measurement}});

  auto run_kind = [&](UpperLevelKind kind) {
    LargeScaleRun run;
    run.solution = grid_search(kind, data, op, reg, spec.grid, spec.solve);
    LowerLevelProblem problem(op, reg, result.measurement, run.solution.alpha_hat);
    run.reconstruction = solve(problem, spec.solve).x;
    return run;
  };
  result.mse = run_kind(UpperLevelKind::mse);
  result.predictive = run_kind(UpperLevelKind::predictive_risk);
  return result;
}

}  // namespace bilearn
