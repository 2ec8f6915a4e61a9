#pragma once

#include <string_view>

#include "bilearn/config.hpp"

namespace bilearn {

inline constexpr std::string_view kVersion = "0.1.0";

/// Executes the configured command and writes its artifacts (CSV, records,
/// PGM images and a manifest) into config.out_dir. Throws bilearn::Error
/// subclasses on failure.
void run(const RunConfig& config);

}  // namespace bilearn
