#include "romef/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "romef/errors.hpp"
#include "romef/run_fom.hpp"

namespace romef {

using nlohmann::json;

namespace {

const std::vector<std::string> kPodFields{"v", "q", "u", "qbar"};

/// Typed access to one JSON object that remembers which keys were read, so
/// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    }
    out = v.get<T>();
  }

  ObjectReader child(const std::string& key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), where(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key " + where(k));
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_sup(ObjectReader r, SupremizerCounts& c) {
  r.get("s", c.s);
  r.get("sbar", c.sbar);
  r.finish();
}

void check_count(const std::string& key, int n, int n_s) {
  if (n < 1 || n > n_s) {
    throw ConfigError(key + " = " + std::to_string(n) + " must lie in [1, N_s = " + std::to_string(n_s) + "]");
  }
}

}  // namespace

int RunConfig::sample_stride() const { return romef::sample_stride(sample_interval, physics.dt); }

int RunConfig::n_snapshots() const {
  return static_cast<int>(std::llround((physics.T - physics.t0) / sample_interval));
}

std::vector<std::string> preset_names() { return {"ci", "paper"}; }

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.pod.counts = {{"v", 2}, {"q", 2}, {"u", 2}, {"qbar", 1}};
  if (name == "paper") {
    c.mesh.cells = 15900;
    c.physics.dt = 4e-4;
    c.sample_interval = 0.1;
    c.output_dir = "romef_paper";
  } else if (name == "ci") {
    c.mesh.cells = 2000;
    c.physics.dt = 1e-3;
    c.sample_interval = 0.2;
    c.output_dir = "romef_ci";
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected ci or paper)");
  }
  return c;
}

RunConfig config_from_json(const json& j) {
  ObjectReader r(j, "");
  RunConfig c;
  if (r.has("preset")) {
    std::string p;
    r.get("preset", p);
    c = preset_config(p);
  } else {
    c = preset_config("paper");
    c.preset.clear();
  }

  if (r.has("mesh")) {
    auto m = r.child("mesh");
    if (m.has("file")) {
      m.get("file", c.mesh.file);
      if (m.has("cells") || m.has("bias")) throw ConfigError("mesh: give either file or cells/bias, not both");
    } else {
      c.mesh.file.clear();
      m.get("cells", c.mesh.cells);
      m.get("bias", c.mesh.bias);
    }
    m.finish();
  }
  if (r.has("physics")) {
    auto p = r.child("physics");
    p.get("rho", c.physics.rho);
    p.get("mu", c.physics.mu);
    p.get("alpha", c.physics.alpha);
    p.get("dt", c.physics.dt);
    p.get("t0", c.physics.t0);
    p.get("T", c.physics.T);
    p.finish();
  }
  r.get("inlet_law", c.inlet_law);
  if (r.has("snapshots")) {
    auto s = r.child("snapshots");
    s.get("interval", c.sample_interval);
    s.finish();
  }
  if (r.has("pod")) {
    auto p = r.child("pod");
    if (p.has("modes")) {
      if (p.has("energy")) throw ConfigError("pod: give either modes or energy, not both");
      auto m = p.child("modes");
      c.pod.counts.clear();
      for (const auto& f : kPodFields) {
        int n = 0;
        if (!m.has(f)) throw ConfigError("pod.modes." + f + " is required");
        m.get(f, n);
        c.pod.counts[f] = n;
      }
      m.finish();
    } else if (p.has("energy")) {
      c.pod.counts.clear();
      p.get("energy", c.pod.energy);
    }
    p.get("report_energy", c.pod.report_energy);
    if (p.has("supremizers")) {
      auto s = p.child("supremizers");
      if (s.has("sup1")) read_sup(s.child("sup1"), c.pod.sup1);
      if (s.has("sup2")) read_sup(s.child("sup2"), c.pod.sup2);
      s.finish();
    }
    p.finish();
  }
  if (r.has("modes")) {
    const json& m = r.raw("modes");
    if (!m.is_array()) throw ConfigError("modes must be an array of strings");
    c.modes.clear();
    for (const auto& e : m) {
      if (!e.is_string()) throw ConfigError("modes must be an array of strings");
      c.modes.push_back(parse_stab_mode(e.get<std::string>()));
    }
  }
  r.get("output_dir", c.output_dir);
  if (r.has("solver")) {
    auto s = r.child("solver");
    s.get("piso_correctors", c.solver.piso_correctors);
    s.get("nonorth_correctors", c.solver.nonorth_correctors);
    s.get("simplec_tol", c.solver.simplec_tol);
    s.get("simplec_max_iter", c.solver.simplec_max_iter);
    s.get("p_tol", c.solver.p_tol);
    s.get("u_tol", c.solver.u_tol);
    s.get("max_linear_iter", c.solver.max_linear_iter);
    s.get("supremizer_tol", c.supremizer_tol);
    s.finish();
  }
  if (r.has("lifting")) {
    auto l = r.child("lifting");
    l.get("alpha", c.lifting_alpha);
    l.get("tol", c.lifting_tol);
    l.get("max_iter", c.lifting_max_iter);
    l.finish();
  }
  if (r.has("online")) {
    auto o = r.child("online");
    o.get("timing_repeats", c.timing_repeats);
    o.finish();
  }
  r.finish();
  validate(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  if (!c.mesh.file.empty()) {
    j["mesh"] = {{"file", c.mesh.file}};
  } else {
    j["mesh"] = {{"cells", c.mesh.cells}, {"bias", c.mesh.bias}};
  }
  j["physics"] = {{"rho", c.physics.rho}, {"mu", c.physics.mu}, {"alpha", c.physics.alpha},
                  {"dt", c.physics.dt},   {"t0", c.physics.t0}, {"T", c.physics.T}};
  j["inlet_law"] = c.inlet_law;
  j["snapshots"] = {{"interval", c.sample_interval}};
  json pod;
  if (!c.pod.counts.empty()) {
    pod["modes"] = c.pod.counts;
  } else {
    pod["energy"] = c.pod.energy;
  }
  pod["report_energy"] = c.pod.report_energy;
  pod["supremizers"] = {{"sup1", {{"s", c.pod.sup1.s}, {"sbar", c.pod.sup1.sbar}}},
                        {"sup2", {{"s", c.pod.sup2.s}, {"sbar", c.pod.sup2.sbar}}}};
  j["pod"] = pod;
  json modes = json::array();
  for (StabMode m : c.modes) modes.push_back(to_string(m));
  j["modes"] = modes;
  j["output_dir"] = c.output_dir;
  j["solver"] = {{"piso_correctors", c.solver.piso_correctors},
                 {"nonorth_correctors", c.solver.nonorth_correctors},
                 {"simplec_tol", c.solver.simplec_tol},
                 {"simplec_max_iter", c.solver.simplec_max_iter},
                 {"p_tol", c.solver.p_tol},
                 {"u_tol", c.solver.u_tol},
                 {"max_linear_iter", c.solver.max_linear_iter},
                 {"supremizer_tol", c.supremizer_tol}};
  j["lifting"] = {{"alpha", c.lifting_alpha}, {"tol", c.lifting_tol}, {"max_iter", c.lifting_max_iter}};
  j["online"] = {{"timing_repeats", c.timing_repeats}};
  return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return config_to_json(a) == config_to_json(b); }

void validate(const RunConfig& c) {
  c.physics.validate();
  if (c.mesh.file.empty()) {
    if (c.mesh.cells < 200) throw ConfigError("mesh.cells must be at least 200");
    if (!(c.mesh.bias >= 1.0)) throw ConfigError("mesh.bias must be >= 1");
  }
  inlet_law(c.inlet_law);
  c.sample_stride();
  const double span = c.physics.T - c.physics.t0;
  const int n_s = c.n_snapshots();
  if (std::abs(n_s * c.sample_interval - span) > 1e-9 * std::max(1.0, span)) {
    throw ConfigError("snapshots.interval must divide T - t0");
  }
  if (n_s < 2) throw ConfigError("at least two snapshots are required");

  if (!c.pod.counts.empty()) {
    for (const auto& f : kPodFields) {
      auto it = c.pod.counts.find(f);
      if (it == c.pod.counts.end()) throw ConfigError("pod.modes." + f + " is required");
      check_count("pod.modes." + f, it->second, n_s);
    }
    if (c.pod.counts.size() != kPodFields.size()) throw ConfigError("pod.modes has unknown fields");
  } else if (!(c.pod.energy > 0.0 && c.pod.energy <= 1.0)) {
    throw ConfigError("pod.energy must lie in (0, 1]");
  }
  if (!(c.pod.report_energy > 0.0 && c.pod.report_energy <= 1.0)) {
    throw ConfigError("pod.report_energy must lie in (0, 1]");
  }

  if (c.modes.empty()) throw ConfigError("modes must not be empty");
  std::set<StabMode> seen;
  for (StabMode m : c.modes) {
    if (!seen.insert(m).second) throw ConfigError("mode " + to_string(m) + " listed twice");
  }
  if (seen.count(StabMode::Sup1)) {
    check_count("pod.supremizers.sup1.s", c.pod.sup1.s, n_s);
    check_count("pod.supremizers.sup1.sbar", c.pod.sup1.sbar, n_s);
  }
  if (seen.count(StabMode::Sup2)) {
    check_count("pod.supremizers.sup2.s", c.pod.sup2.s, n_s);
    check_count("pod.supremizers.sup2.sbar", c.pod.sup2.sbar, n_s);
  }

  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  const SolverControls& s = c.solver;
  if (s.piso_correctors < 1) throw ConfigError("solver.piso_correctors must be at least 1");
  if (s.nonorth_correctors < 0) throw ConfigError("solver.nonorth_correctors must be non-negative");
  if (!(s.simplec_tol > 0.0) || !(s.p_tol > 0.0) || !(s.u_tol > 0.0) || !(c.supremizer_tol > 0.0)) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (s.simplec_max_iter < 1 || s.max_linear_iter < 1) throw ConfigError("solver iteration limits must be positive");
  if (!(c.lifting_alpha > 0.0) || !(c.lifting_tol > 0.0) || c.lifting_max_iter < 1) {
    throw ConfigError("lifting parameters must be positive");
  }
  if (c.timing_repeats < 1) throw ConfigError("online.timing_repeats must be at least 1");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c = config_from_json(j);
  if (const char* env = std::getenv("ROMEF_OUTPUT_DIR"); env && *env) c.output_dir = env;
  return c;
}

}  // namespace romef
