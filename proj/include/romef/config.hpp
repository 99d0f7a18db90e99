#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "romef/fom.hpp"
#include "romef/rom_ops.hpp"

namespace romef {

struct MeshSource {
  /// Empty: generate the cylinder mesh from `cells` and `bias`.
  std::string file;
  int cells = 15900;
  double bias = 2.0;
};

struct SupremizerCounts {
  int s = 0;     // supremizers of q
  int sbar = 0;  // supremizers of q-bar
};

struct PodTargets {
  /// Explicit counts for v, q, u, qbar. When empty, `energy` decides.
  std::map<std::string, int> counts;
  double energy = 0.99;
  /// Energy fraction whose mode counts are reported alongside (pod stage).
  double report_energy = 0.99;
  SupremizerCounts sup1{4, 3};
  SupremizerCounts sup2{2, 1};
};

struct RunConfig {
  std::string preset;  // informational, "" for custom
  MeshSource mesh;
  PhysicsConfig physics;
  std::string inlet_law = "benchmark";
  double sample_interval = 0.1;
  PodTargets pod;
  std::vector<StabMode> modes{StabMode::Nos, StabMode::Ppe, StabMode::Sup1, StabMode::Sup2};
  std::string output_dir = "romef_out";
  SolverControls solver;
  double lifting_alpha = 0.03;
  double lifting_tol = 1e-11;
  int lifting_max_iter = 5000;
  double supremizer_tol = 1e-10;
  int timing_repeats = 3;

  int n_snapshots() const;
  int sample_stride() const;
};

/// Bundled presets "paper" and "ci".
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Parses a config object. A "preset" key selects the base values, other
/// keys override them. Unknown keys, wrong types and violated constraints
/// raise ConfigError naming the offending key.
RunConfig config_from_json(const nlohmann::json& j);
/// Complete serialisation; config_from_json(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& c);

/// Reads a JSON file, applies ROMEF_OUTPUT_DIR when set and validates.
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (dt divides the sampling interval, counts not above
/// N_s, ...). Throws ConfigError.
void validate(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace romef
