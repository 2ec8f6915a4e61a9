#include "bilearn/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "bilearn/bilevel.hpp"
#include "bilearn/errors.hpp"
#include "bilearn/experiments.hpp"
#include "bilearn/io.hpp"
#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"
#include "bilearn/varsolve.hpp"

namespace bilearn {

namespace {

ForwardOperator build_operator(const RunConfig& c) {
  if (c.operator_kind == "identity") return ForwardOperator::identity(c.operator_size);
  if (c.operator_kind == "dense") {
    if (!c.operator_file) throw ConfigError("config key 'operator.file': required for dense kind");
    return ForwardOperator::dense(io::load_matrix(*c.operator_file), c.operator_sigma_tol);
  }
  return ForwardOperator::gaussian_blur(c.operator_side, c.operator_sigma_pixels,
                                        c.operator_radius, c.operator_sigma_tol);
}

LinearMap build_map(const RunConfig& c, Eigen::Index n) {
  if (c.regularizer_k == "identity") return LinearMap::identity(n);
  if (c.regularizer_k == "first-difference-1d") return LinearMap::first_difference(n);
  const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n) {
    throw ConfigError("config key 'regularizer.k': image-gradient-2d needs a square image size");
  }
  return LinearMap::image_gradient(side);
}

Regularizer build_regularizer(const RunConfig& c, Eigen::Index n) {
  if (c.regularizer_kind == "tikhonov") return Regularizer::tikhonov();
  if (c.regularizer_kind == "generalized-tikhonov") {
    return Regularizer::generalized_tikhonov(build_map(c, n));
  }
  if (c.regularizer_kind == "huber") return Regularizer::huber(c.regularizer_gamma);
  if (c.regularizer_kind == "generalized-huber") {
    return Regularizer::generalized_huber(build_map(c, n), c.regularizer_gamma);
  }
  if (c.regularizer_beta <= 0.0) {
    throw ConfigError("config key 'regularizer.beta': must be positive for elastic-huber");
  }
  return Regularizer::elastic_huber(c.regularizer_beta, c.regularizer_gamma);
}

SolveOptions build_solve_options(const RunConfig& c) {
  SolveOptions opt;
  opt.grad_tol = c.solver_grad_tol;
  opt.max_iterations = c.solver_max_iterations;
  return opt;
}

UpperLevelKind build_upper(const RunConfig& c) {
  return c.upper == "predictive" ? UpperLevelKind::predictive_risk : UpperLevelKind::mse;
}

/// Loads the training pairs from file, or synthesizes them by perturbing the
/// configured ground truth with seeded componentwise Gaussian noise.
Dataset build_dataset(const RunConfig& c) {
  if (c.data_file) return io::load_pairs(*c.data_file);
  const Eigen::Index n = c.data_ground_truth.size();
  if (c.data_noise_mean.size() != n || c.data_noise_stddev.size() != n) {
    throw ConfigError("config keys 'data.noise-mean'/'data.noise-stddev' must match "
                      "'data.ground-truth' in length");
  }
  NormalSampler sampler(c.seed);
  std::vector<TrainingPair> pairs;
  pairs.reserve(c.data_samples);
  for (int k = 0; k < c.data_samples; ++k) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = c.data_ground_truth[i] + c.data_noise_mean[i] + c.data_noise_stddev[i] * sampler.next();
    }
    pairs.push_back(TrainingPair{c.data_ground_truth, std::move(y)});
  }
  return Dataset(std::move(pairs));
}

std::string opt_cond(bool available, bool value) {
  if (!available) return "n/a";
  return value ? "true" : "false";
}

void write_manifest(const RunConfig& c, double wall_seconds) {
  std::ofstream out(c.out_dir / "manifest.txt");
  if (!out) throw DataError("cannot write manifest in " + c.out_dir.string());
  out << "# bilearn " << kVersion << "\n";
  out << "# wall-time-seconds " << wall_seconds << "\n";
  out << serialize_config(c);
}

void run_solve_lower(const RunConfig& c) {
  const ForwardOperator op = build_operator(c);
  const Regularizer reg = build_regularizer(c, op.cols());
  const Dataset data = build_dataset(c);
  const Eigen::VectorXd& y = data.pairs.front().measurement;

  LowerLevelProblem problem(op, reg, y, c.alpha);
  ReconstructionResult res = solve(problem, build_solve_options(c));
  io::save_vector(c.out_dir / "reconstruction.txt", res.x);

  std::ofstream out(c.out_dir / "solve.txt");
  out << "alpha = " << io::format_double(c.alpha) << "\n";
  out << "grad_norm = " << io::format_double(res.grad_norm) << "\n";
  out << "iterations = " << res.iterations << "\n";
  out << "used_closed_form = " << (res.used_closed_form ? "true" : "false") << "\n";
  if (c.alpha > 0.0) {
    out << "optimality_residual = " << io::format_double(verify_optimality_identity(problem, res))
        << "\n";
  }
}

void run_check_positivity(const RunConfig& c) {
  const ForwardOperator op = build_operator(c);
  const Regularizer reg = build_regularizer(c, op.cols());
  const Dataset data = build_dataset(c);
  const bool denoising = op.kind() == ForwardOperator::Kind::identity;
  const bool square = op.is_square() && op.is_injective();

  std::ofstream out(c.out_dir / "conditions.txt");
  if (c.expected) {
    out << "new_condition_expected = "
        << opt_cond(true, check_condition_new_expected(op, reg, data)) << "\n";
    out << "predictive_condition = "
        << opt_cond(square, square && check_condition_predictive(reg, data, op)) << "\n";
    out << "symmetric_bregman_condition = "
        << opt_cond(denoising, denoising && check_condition_symmetric_bregman(reg, data)) << "\n";
    const double alphas[] = {1e3, 1.0, 1e-3};
    out << "gradient_compat = "
        << opt_cond(true, check_condition_gradient_compat(op, reg, alphas, data,
                                                          build_solve_options(c)))
        << "\n";
  } else {
    const TrainingPair& p = data.pairs.front();
    out << "old_condition = "
        << opt_cond(denoising, denoising && check_condition_old(reg, p.ground_truth, p.measurement))
        << "\n";
    out << "new_condition = "
        << opt_cond(true, check_condition_new_pointwise(op, reg, p.ground_truth, p.measurement))
        << "\n";
    Dataset single({p});
    out << "predictive_condition = "
        << opt_cond(square, square && check_condition_predictive(reg, single, op)) << "\n";
  }
}

void run_learn_alpha(const RunConfig& c) {
  const ForwardOperator op = build_operator(c);
  const Regularizer reg = build_regularizer(c, op.cols());
  const Dataset data = build_dataset(c);
  const BilevelSolution sol = grid_search(build_upper(c), data, op, reg,
                                          AlphaGrid::parse(c.grid_spec), build_solve_options(c));
  io::write_cost_curve_csv(c.out_dir / "cost_curve.csv", sol.cost_curve);
  io::write_solution_record(c.out_dir / "solution.txt", sol);
}

void run_region_scan_cmd(const RunConfig& c) {
  RegionScanSpec spec;
  spec.domain = {c.scan_x1_lo, c.scan_x1_hi, c.scan_x2_lo, c.scan_x2_hi};
  spec.resolution = c.scan_resolution;
  spec.ground_truth = c.scan_ground_truth;
  spec.op = build_operator(c);
  spec.reg = build_regularizer(c, spec.op.cols());
  spec.grid = AlphaGrid::parse(c.grid_spec);
  spec.upper = build_upper(c);
  spec.solve = build_solve_options(c);
  spec.workers = c.workers;

  const RegionScanResult result = run_region_scan(spec);
  io::write_region_scan_csv(c.out_dir / "region_scan.csv", result);
  const std::string problem =
      spec.op.kind() == ForwardOperator::Kind::identity ? "denoising" : "deconvolution";
  io::write_ratio_table_csv(c.out_dir / "ratios.csv",
                            compute_area_ratios(result, problem, c.regularizer_kind));
}

void run_noise_study_cmd(const RunConfig& c) {
  NoiseStudySpec spec;
  spec.ground_truth = c.data_ground_truth;
  spec.sample_count = c.data_samples;
  spec.noise_mean = c.data_noise_mean;
  spec.noise_stddev = c.data_noise_stddev;
  spec.reg = build_regularizer(c, spec.ground_truth.size());
  spec.grid = AlphaGrid::parse(c.grid_spec);
  spec.seed = c.seed;
  spec.solve = build_solve_options(c);

  const NoiseStudyResult result = run_noise_study(spec);
  io::write_cost_curve_csv(c.out_dir / "cost_curve.csv", result.solution.cost_curve);
  io::write_solution_record(c.out_dir / "solution.txt", result.solution);
  io::save_pairs(c.out_dir / "samples.txt", result.data);
}

void run_large_scale_cmd(const RunConfig& c) {
  LargeScaleSpec spec;
  spec.side = c.large_side;
  spec.blur_sigma = c.large_blur_sigma;
  spec.noise_scale = c.large_noise_scale;
  spec.spread_noise = c.large_noise_spread;
  spec.seed = c.seed;
  spec.grid = AlphaGrid::parse(c.grid_spec);
  spec.solve = build_solve_options(c);

  const LargeScaleResult result = run_large_scale(spec);
  io::write_pgm(c.out_dir / "phantom.pgm", result.phantom, spec.side);
  io::write_pgm(c.out_dir / "measurement.pgm", result.measurement, spec.side);
  io::write_cost_curve_csv(c.out_dir / "cost_curve_mse.csv", result.mse.solution.cost_curve);
  io::write_cost_curve_csv(c.out_dir / "cost_curve_predictive.csv",
                           result.predictive.solution.cost_curve);
  io::write_solution_record(c.out_dir / "solution_mse.txt", result.mse.solution);
  io::write_solution_record(c.out_dir / "solution_predictive.txt", result.predictive.solution);
  io::write_pgm(c.out_dir / "reconstruction_mse.pgm", result.mse.reconstruction, spec.side);
  io::write_pgm(c.out_dir / "reconstruction_predictive.pgm", result.predictive.reconstruction,
                spec.side);
}

}  // namespace

void run(const RunConfig& raw) {
  RunConfig config = raw;
  resolve_defaults(config);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + config.out_dir.string());

  const auto start = std::chrono::steady_clock::now();
  switch (config.command) {
    case Command::solve_lower: run_solve_lower(config); break;
    case Command::check_positivity: run_check_positivity(config); break;
    case Command::learn_alpha: run_learn_alpha(config); break;
    case Command::region_scan: run_region_scan_cmd(config); break;
    case Command::noise_study: run_noise_study_cmd(config); break;
    case Command::large_scale: run_large_scale_cmd(config); break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(config, seconds);
}

}  // namespace bilearn
