#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "romef/config.hpp"
#include "romef/mesh.hpp"

namespace romef {

/// 64-bit FNV-1a of a file's bytes / of a string, as 16 hex digits.
std::string hash_file(const std::filesystem::path& path);
std::string hash_string(const std::string& s);

/// Exclusive ownership of an output directory (lock file created with
/// O_EXCL semantics, removed on destruction). Throws ConfigError when the
/// directory is already locked.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct StageOutcome {
  std::string name;
  bool ran = false;  // false: skipped, inputs and outputs unchanged
  double seconds = 0.0;
};

/// Offline/online/compare stages over one output directory. Each stage
/// records the hash of its inputs and of every output file in
/// manifest.json; a stage is skipped when its input hash matches, its
/// outputs are intact and no upstream stage ran in the same invocation.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg, std::ostream* log = nullptr);
  ~Pipeline();

  /// mesh, fom, lifting, supremizers, pod, operators:<mode> for every mode.
  std::vector<StageOutcome> offline();
  /// online:<mode>. Requires the offline artifacts.
  StageOutcome online(StabMode mode);
  /// online stages of all configured modes, then compare.
  std::vector<StageOutcome> compare();

  const RunConfig& config() const { return cfg_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& rel) const { return dir_ / rel; }

  /// Names of every stage ever recorded in the manifest, in order.
  std::vector<std::string> recorded_stages() const;

 private:
  using Body = std::function<std::vector<std::string>()>;
  StageOutcome run_stage(const std::string& name, const nlohmann::json& inputs,
                         const std::vector<std::string>& upstream, const Body& body);
  bool stage_valid(const std::string& name, const std::string& input_hash) const;
  std::string output_hash(const std::string& stage, const std::string& rel) const;
  void require(const std::string& stage, const std::string& command) const;
  void save_manifest() const;
  void say(const std::string& msg) const;

  const Mesh& mesh();

  std::vector<std::string> stage_mesh();
  std::vector<std::string> stage_fom();
  std::vector<std::string> stage_lifting();
  std::vector<std::string> stage_supremizers();
  std::vector<std::string> stage_pod();
  std::vector<std::string> stage_operators(StabMode mode);
  std::vector<std::string> stage_online(StabMode mode);
  std::vector<std::string> stage_compare();

  RunConfig cfg_;
  std::filesystem::path dir_;
  std::ostream* log_;
  std::unique_ptr<DirectoryLock> lock_;
  nlohmann::ordered_json manifest_;
  std::vector<std::string> ran_;  // stages executed in this invocation
  std::unique_ptr<Mesh> mesh_;
};

/// Files written by the stages, relative to the output directory.
namespace artifacts {
inline const std::string mesh = "mesh.msh";
inline const std::string lifting = "lifting.snp";
inline const std::string fom_history = "fom/history.csv";
inline const std::string fom_info = "fom/fom.json";
inline const std::string pod_energy = "pod/pod_energy.csv";
inline const std::string mode_counts = "pod/mode_counts.json";
inline const std::string errors_summary = "compare/errors_summary.csv";
inline const std::string errors_time = "compare/errors_time.csv";
inline const std::string aero_errors = "compare/aero_errors.csv";
inline const std::string aero_time = "compare/aero_time.csv";
inline const std::string timing = "timing.json";
inline const std::string manifest = "manifest.json";
std::string fom_snapshots(const std::string& field);
std::string supremizers(const std::string& field);
std::string pod_modes(const std::string& field);
std::string pod_eigenvalues(const std::string& field);
std::string operators(StabMode mode);
std::string operators_info(StabMode mode);
std::string trajectory(StabMode mode);
std::string online_info(StabMode mode);
std::string reconstruction(StabMode mode, const std::string& field);
}  // namespace artifacts

}  // namespace romef
