#include "bilearn/config.hpp"

#include <fstream>
#include <sstream>

#include "bilearn/errors.hpp"

namespace bilearn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

Eigen::VectorXd parse_vector(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  if (!ss.eof()) throw ConfigError("config key '" + key + "': expected numbers, got '" + value + "'");
  if (vals.empty()) throw ConfigError("config key '" + key + "': empty vector");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
}

std::string vector_to_string(const Eigen::VectorXd& v) {
  std::ostringstream ss;
  ss.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) ss << (i ? " " : "") << v[i];
  return ss.str();
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "command") {
    c.command = parse_command(value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_long(key, value));
  } else if (key == "workers") {
    c.workers = static_cast<int>(parse_long(key, value));
    if (c.workers < 0) throw ConfigError("config key 'workers': must be >= 0");
  } else if (key == "out.dir") {
    c.out_dir = value;
  } else if (key == "grid") {
    c.grid_spec = value;
  } else if (key == "operator.kind") {
    if (value != "identity" && value != "dense" && value != "blur") {
      throw ConfigError("config key 'operator.kind': unknown kind '" + value + "'");
    }
    c.operator_kind = value;
  } else if (key == "operator.size") {
    c.operator_size = static_cast<int>(parse_long(key, value));
    if (c.operator_size < 1) throw ConfigError("config key 'operator.size': must be >= 1");
  } else if (key == "operator.file") {
    if (!std::filesystem::exists(value)) {
      throw ConfigError("config key 'operator.file': file does not exist: " + value);
    }
    c.operator_file = value;
  } else if (key == "operator.side") {
    c.operator_side = static_cast<int>(parse_long(key, value));
    if (c.operator_side < 2) throw ConfigError("config key 'operator.side': must be >= 2");
  } else if (key == "operator.sigma-pixels") {
    c.operator_sigma_pixels = parse_double(key, value);
    if (!(c.operator_sigma_pixels > 0.0)) {
      throw ConfigError("config key 'operator.sigma-pixels': must be positive");
    }
  } else if (key == "operator.radius") {
    c.operator_radius = static_cast<int>(parse_long(key, value));
  } else if (key == "operator.sigma-tol") {
    c.operator_sigma_tol = parse_double(key, value);
    if (!(c.operator_sigma_tol > 0.0)) {
      throw ConfigError("config key 'operator.sigma-tol': must be positive");
    }
  } else if (key == "regularizer.kind") {
    if (value != "tikhonov" && value != "generalized-tikhonov" && value != "huber" &&
        value != "generalized-huber" && value != "elastic-huber") {
      throw ConfigError("config key 'regularizer.kind': unknown kind '" + value + "'");
    }
    c.regularizer_kind = value;
  } else if (key == "regularizer.gamma") {
    c.regularizer_gamma = parse_double(key, value);
    if (!(c.regularizer_gamma > 0.0)) {
      throw ConfigError("config key 'regularizer.gamma': must be positive");
    }
  } else if (key == "regularizer.beta") {
    c.regularizer_beta = parse_double(key, value);
    if (c.regularizer_beta < 0.0) throw ConfigError("config key 'regularizer.beta': must be >= 0");
  } else if (key == "regularizer.k") {
    if (value != "identity" && value != "first-difference-1d" && value != "image-gradient-2d") {
      throw ConfigError("config key 'regularizer.k': unknown preset '" + value + "'");
    }
    c.regularizer_k = value;
  } else if (key == "solver.grad-tol") {
    c.solver_grad_tol = parse_double(key, value);
    if (!(c.solver_grad_tol > 0.0)) throw ConfigError("config key 'solver.grad-tol': must be positive");
  } else if (key == "solver.max-iterations") {
    c.solver_max_iterations = parse_long(key, value);
    if (c.solver_max_iterations < 1) {
      throw ConfigError("config key 'solver.max-iterations': must be >= 1");
    }
  } else if (key == "data.file") {
    if (!std::filesystem::exists(value)) {
      throw ConfigError("config key 'data.file': file does not exist: " + value);
    }
    c.data_file = value;
  } else if (key == "data.ground-truth") {
    c.data_ground_truth = parse_vector(key, value);
  } else if (key == "data.noise-mean") {
    c.data_noise_mean = parse_vector(key, value);
  } else if (key == "data.noise-stddev") {
    c.data_noise_stddev = parse_vector(key, value);
    if ((c.data_noise_stddev.array() <= 0.0).any()) {
      throw ConfigError("config key 'data.noise-stddev': entries must be positive");
    }
  } else if (key == "data.samples") {
    c.data_samples = static_cast<int>(parse_long(key, value));
    if (c.data_samples < 1) throw ConfigError("config key 'data.samples': must be >= 1");
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
    if (!(c.alpha >= 0.0)) throw ConfigError("config key 'alpha': must be >= 0");
  } else if (key == "expected") {
    c.expected = parse_bool(key, value);
  } else if (key == "upper") {
    if (value != "mse" && value != "predictive") {
      throw ConfigError("config key 'upper': expected mse or predictive, got '" + value + "'");
    }
    c.upper = value;
  } else if (key == "scan.domain") {
    const Eigen::VectorXd v = parse_vector(key, value);
    if (v.size() != 4) throw ConfigError("config key 'scan.domain': expected 4 numbers");
    c.scan_x1_lo = v[0];
    c.scan_x1_hi = v[1];
    c.scan_x2_lo = v[2];
    c.scan_x2_hi = v[3];
    if (!(v[0] < v[1]) || !(v[2] < v[3])) {
      throw ConfigError("config key 'scan.domain': bounds must be increasing");
    }
  } else if (key == "scan.resolution") {
    c.scan_resolution = static_cast<int>(parse_long(key, value));
    if (c.scan_resolution < 8) throw ConfigError("config key 'scan.resolution': must be >= 8");
  } else if (key == "scan.ground-truth") {
    c.scan_ground_truth = parse_vector(key, value);
    if (c.scan_ground_truth.size() != 2) {
      throw ConfigError("config key 'scan.ground-truth': expected 2 numbers");
    }
  } else if (key == "large.side") {
    c.large_side = static_cast<int>(parse_long(key, value));
    if (c.large_side < 16) throw ConfigError("config key 'large.side': must be >= 16");
  } else if (key == "large.blur-sigma") {
    c.large_blur_sigma = parse_double(key, value);
    if (!(c.large_blur_sigma > 0.0)) throw ConfigError("config key 'large.blur-sigma': must be positive");
  } else if (key == "large.noise-scale") {
    c.large_noise_scale = parse_double(key, value);
    if (c.large_noise_scale < 0.0) throw ConfigError("config key 'large.noise-scale': must be >= 0");
  } else if (key == "large.noise-spread") {
    c.large_noise_spread = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "solve-lower") return Command::solve_lower;
  if (name == "check-positivity") return Command::check_positivity;
  if (name == "learn-alpha") return Command::learn_alpha;
  if (name == "region-scan") return Command::region_scan;
  if (name == "noise-study") return Command::noise_study;
  if (name == "large-scale") return Command::large_scale;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::solve_lower: return "solve-lower";
    case Command::check_positivity: return "check-positivity";
    case Command::learn_alpha: return "learn-alpha";
    case Command::region_scan: return "region-scan";
    case Command::noise_study: return "noise-study";
    case Command::large_scale: return "large-scale";
  }
  return "unknown";
}

RunConfig::RunConfig() {
  data_ground_truth = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
  data_noise_mean = Eigen::VectorXd::Zero(2);
  data_noise_stddev = (Eigen::VectorXd(2) << 0.1, 0.1).finished();
  scan_ground_truth = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
}

void resolve_defaults(RunConfig& config) {
  if (config.regularizer_kind.empty()) {
    config.regularizer_kind =
        config.command == Command::noise_study ? "elastic-huber" : "tikhonov";
  }
  if (config.grid_spec.empty()) {
    config.grid_spec =
        config.command == Command::noise_study ? "lin:0:0.1:50" : "zero,log:-12:3:98,1e7";
  }
}

RunConfig parse_config_text(const std::string& text, bool resolve) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    set_key(config, key, value);
  }
  if (resolve) resolve_defaults(config);
  return config;
}

RunConfig parse_config_file(const std::filesystem::path& path, bool resolve) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), resolve);
}

void apply_overrides(RunConfig& config, const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) set_key(config, key, value);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "command = " << to_string(c.command) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "workers = " << c.workers << "\n";
  out << "out.dir = " << c.out_dir.string() << "\n";
  out << "grid = " << c.grid_spec << "\n";
  out << "operator.kind = " << c.operator_kind << "\n";
  out << "operator.size = " << c.operator_size << "\n";
  if (c.operator_file) out << "operator.file = " << c.operator_file->string() << "\n";
  out << "operator.side = " << c.operator_side << "\n";
  out << "operator.sigma-pixels = " << c.operator_sigma_pixels << "\n";
  out << "operator.radius = " << c.operator_radius << "\n";
  out << "operator.sigma-tol = " << c.operator_sigma_tol << "\n";
  out << "regularizer.kind = " << c.regularizer_kind << "\n";
  out << "regularizer.gamma = " << c.regularizer_gamma << "\n";
  out << "regularizer.beta = " << c.regularizer_beta << "\n";
  out << "regularizer.k = " << c.regularizer_k << "\n";
  out << "solver.grad-tol = " << c.solver_grad_tol << "\n";
  out << "solver.max-iterations = " << c.solver_max_iterations << "\n";
  if (c.data_file) out << "data.file = " << c.data_file->string() << "\n";
  out << "data.ground-truth = " << vector_to_string(c.data_ground_truth) << "\n";
  out << "data.noise-mean = " << vector_to_string(c.data_noise_mean) << "\n";
  out << "data.noise-stddev = " << vector_to_string(c.data_noise_stddev) << "\n";
  out << "data.samples = " << c.data_samples << "\n";
  out << "alpha = " << c.alpha << "\n";
  out << "expected = " << (c.expected ? "true" : "false") << "\n";
  out << "upper = " << c.upper << "\n";
  out << "scan.domain = " << c.scan_x1_lo << " " << c.scan_x1_hi << " " << c.scan_x2_lo << " "
      << c.scan_x2_hi << "\n";
  out << "scan.resolution = " << c.scan_resolution << "\n";
  out << "scan.ground-truth = " << vector_to_string(c.scan_ground_truth) << "\n";
  out << "large.side = " << c.large_side << "\n";
  out << "large.blur-sigma = " << c.large_blur_sigma << "\n";
  out << "large.noise-scale = " << c.large_noise_scale << "\n";
  out << "large.noise-spread = " << (c.large_noise_spread ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace bilearn
