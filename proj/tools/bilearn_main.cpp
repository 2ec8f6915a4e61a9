#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bilearn/config.hpp"
#include "bilearn/errors.hpp"
#include "bilearn/runner.hpp"

namespace {

int exit_code(bilearn::ErrorCategory category) {
  switch (category) {
    case bilearn::ErrorCategory::config: return 2;
    case bilearn::ErrorCategory::data: return 3;
    case bilearn::ErrorCategory::convergence: return 4;
    case bilearn::ErrorCategory::rank_deficiency: return 5;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilearn: learn regularization parameters of linear inverse problems by "
               "bilevel grid search, check positivity conditions, and run the desk-scale "
               "experiments"};
  app.set_version_flag("--version", std::string(bilearn::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> set_args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Key-value configuration file");
    cmd->add_option_function<std::string>(
        "--out", [&](const std::string& v) { overrides["out.dir"] = v; }, "Output directory");
    cmd->add_option_function<std::string>(
        "--seed", [&](const std::string& v) { overrides["seed"] = v; }, "Random seed");
    cmd->add_option_function<std::string>(
        "--workers", [&](const std::string& v) { overrides["workers"] = v; },
        "Concurrent workers (0 = all cores)");
    cmd->add_option_function<std::string>(
        "--grid", [&](const std::string& v) { overrides["grid"] = v; },
        "Alpha grid, e.g. zero,log:-12:3:98,1e7 or lin:0:0.1:50");
    cmd->add_option("--set", set_args, "Override any config key (key=value); repeatable");
  };

  CLI::App* solve_lower = app.add_subcommand("solve-lower", "Solve the variational problem");
  solve_lower->add_option_function<std::string>(
      "--alpha", [&](const std::string& v) { overrides["alpha"] = v; },
      "Regularization weight");
  add_common(solve_lower);

  CLI::App* check = app.add_subcommand("check-positivity", "Evaluate the positivity conditions");
  check->add_flag_callback("--expected", [&] { overrides["expected"] = "true"; },
                           "Use the expectation (dataset mean) condition variants");
  add_common(check);

  CLI::App* learn = app.add_subcommand("learn-alpha", "Grid-search the regularization parameter");
  learn->add_option_function<std::string>(
      "--upper", [&](const std::string& v) { overrides["upper"] = v; },
      "Upper-level cost: mse or predictive");
  add_common(learn);

  CLI::App* scan = app.add_subcommand("region-scan", "2-D condition/positivity region scan");
  scan->add_option_function<std::string>(
      "--upper", [&](const std::string& v) { overrides["upper"] = v; },
      "Upper-level cost: mse or predictive");
  add_common(scan);

  add_common(app.add_subcommand("noise-study", "Zero-mean noise positivity study"));
  add_common(app.add_subcommand("large-scale", "Phantom deblurring experiment"));

  CLI11_PARSE(app, argc, argv);

  for (const std::string& kv : set_args) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error (config): --set expects key=value, got '" << kv << "'\n";
      return 2;
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  try {
    bilearn::RunConfig config = config_path.empty()
                                    ? bilearn::RunConfig()
                                    : bilearn::parse_config_file(config_path, /*resolve=*/false);
    config.command = bilearn::parse_command(app.get_subcommands().front()->get_name());
    bilearn::apply_overrides(config, overrides);
    bilearn::resolve_defaults(config);
    bilearn::run(config);
  } catch (const bilearn::Error& e) {
    std::cerr << "error (" << bilearn::to_string(e.category()) << "): " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
