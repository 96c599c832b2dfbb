#pragma once

// Experiment configuration files: JSON with one section per module, merged
// onto built-in defaults. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpflux/entropy.hpp"
#include "jumpflux/experiments.hpp"

namespace jumpflux {

struct EntropySettings {
  bool enabled = false;
  double alpha_min = 1e-3;
  double alpha_max = 1.0;
  int alpha_count = 16;
  Branch branch = Branch::Plus;
  std::vector<BumpTestFunction> test_functions;
};

struct RunConfig {
  std::string experiment_id = "custom";
  std::string kind = "convergence";  // convergence | time_to_error
  ExperimentSpec spec;

  // solve
  MeshStrategy solve_strategy = MeshStrategy::WaveCell;
  int solve_cells = 256;
  EntropySettings entropy;

  // sweep
  SweepAxis sweep_axis = SweepAxis::JumpDistance;
  std::vector<double> sweep_values;

  // sample-coefficient
  int realizations = 4;
  int grid_points = 1001;

  /// Fully resolved configuration, as echoed into the run manifest.
  nlohmann::ordered_json resolved;
};

/// Built-in defaults; every accepted key appears here.
nlohmann::ordered_json default_config();

/// Applies `key.path=value` (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::ordered_json& doc, const std::string& assignment);

/// Merges `user` onto the defaults, applies overrides and resolves preset
/// dependent values. Throws std::invalid_argument on unknown keys or
/// invalid values.
RunConfig resolve_config(const nlohmann::ordered_json& user, const std::vector<std::string>& overrides = {});

/// Reads and resolves a config file. Throws std::runtime_error naming the
/// path if it cannot be opened or parsed.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace jumpflux
