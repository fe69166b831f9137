#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace rffrc::recipes {

/// Seed set every recipe reports medians over.
const std::vector<std::uint64_t>& seeds();

/// Names accepted by run(), in canonical order.
const std::vector<std::string>& names();

struct RecipeOptions {
  /// When set, the recipe writes its artifact bundle (metrics.json,
  /// resolved config, and figure-ready CSVs) into this directory.
  std::filesystem::path out_dir;
  bool write_files = false;
  /// ks only: use the full-scale feature count instead of the desk
  /// default.
  bool full_scale = false;
};

struct RecipeResult {
  std::string name;
  bool pass = false;
  std::string summary;      ///< one-line pass/fail text
  nlohmann::json metrics;   ///< everything measured, plus bounds
};

/// Run one pinned experiment recipe:
///   lorenz_onestep, lorenz_multistep, lorenz_sweeps, lorenz_noise,
///   lorenz_partial, mg, ks
/// Throws config_error for an unknown name (message lists the valid
/// ones).  Each recipe checks its own acceptance bounds and reports
/// pass/fail; bounds are recorded in the metrics object.
RecipeResult run(const std::string& name, const RecipeOptions& options = {});

}  // namespace rffrc::recipes
