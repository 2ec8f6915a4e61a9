#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bilearn {

enum class Command {
  solve_lower,
  check_positivity,
  learn_alpha,
  region_scan,
  noise_study,
  large_scale,
};

Command parse_command(const std::string& name);
std::string to_string(Command c);

/// Fully validated run configuration with all defaults filled. The defaults
/// reproduce the reference desk-scale setups: the log grid on [0, 1e7],
/// the [-1.6, 1.6]^2 scan domain at resolution 100 with ground truth
/// [1, 0.5], and the elastic Huber noise study around [1, 0].
struct RunConfig {
  Command command = Command::learn_alpha;

  // shared
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = all hardware threads
  std::filesystem::path out_dir = "out";
  std::string grid_spec;  // empty = command default

  // operator
  std::string operator_kind = "identity";  // identity | dense | blur
  int operator_size = 2;
  std::optional<std::filesystem::path> operator_file;
  int operator_side = 128;
  double operator_sigma_pixels = 6.4;
  int operator_radius = -1;  // -1 = floor(4 sigma)
  double operator_sigma_tol = 1e-10;

  // regularizer
  std::string regularizer_kind;  // empty = command default
  double regularizer_gamma = 0.01;
  double regularizer_beta = 0.01;
  std::string regularizer_k = "identity";  // identity | first-difference-1d | image-gradient-2d

  // solver
  double solver_grad_tol = 1e-10;
  long solver_max_iterations = 100000;

  // data
  std::optional<std::filesystem::path> data_file;
  Eigen::VectorXd data_ground_truth;  // synthesis; empty = unset
  Eigen::VectorXd data_noise_mean;
  Eigen::VectorXd data_noise_stddev;
  int data_samples = 1000;

  // command-specific
  double alpha = 1.0;              // solve-lower
  bool expected = false;           // check-positivity: use expectation checkers
  std::string upper = "mse";       // mse | predictive
  double scan_x1_lo = -1.6, scan_x1_hi = 1.6;
  double scan_x2_lo = -1.6, scan_x2_hi = 1.6;
  int scan_resolution = 100;
  Eigen::VectorXd scan_ground_truth;  // default [1, 0.5]
  int large_side = 128;
  double large_blur_sigma = 0.05;
  double large_noise_scale = 0.1;
  bool large_noise_spread = true;

  RunConfig();
};

/// Fills the command-dependent defaults the flat format leaves empty: the
/// regularizer kind (elastic Huber for noise studies, Tikhonov otherwise)
/// and the alpha grid (linear [0, 0.1] with 50 points for noise studies,
/// the log grid with the zero boundary and the 1e7 proxy otherwise).
void resolve_defaults(RunConfig& config);

/// Parses `key = value` lines (dotted sections, '#' comments). Unknown keys,
/// type mismatches and range violations raise ConfigError naming the key.
/// With `resolve = false` the command-dependent defaults stay empty so that
/// later overrides (e.g. command-line flags) can still change the command.
RunConfig parse_config_text(const std::string& text, bool resolve = true);
RunConfig parse_config_file(const std::filesystem::path& path, bool resolve = true);

/// Applies `key=value` overrides (same keys as the file format) on top of an
/// existing configuration; used for command-line flags.
void apply_overrides(RunConfig& config, const std::map<std::string, std::string>& overrides);

/// Serializes the effective configuration in the same key-value format, so a
/// manifest can be re-parsed to reproduce the run.
std::string serialize_config(const RunConfig& config);

}  // namespace bilearn
