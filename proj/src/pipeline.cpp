#include "romef/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "romef/errors.hpp"
#include "romef/pod.hpp"
#include "romef/postproc.hpp"
#include "romef/rom_assembly.hpp"
#include "romef/rom_online.hpp"
#include "romef/run_fom.hpp"
#include "romef/snapshots.hpp"
#include "romef/supremizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace romef {

namespace artifacts {
std::string fom_snapshots(const std::string& f) { return "fom/" + f + ".snp"; }
std::string supremizers(const std::string& f) { return "supremizers/" + f + ".snp"; }
std::string pod_modes(const std::string& f) { return "pod/" + f + "_modes.snp"; }
std::string pod_eigenvalues(const std::string& f) { return "pod/" + f + "_eigenvalues.csv"; }
std::string operators(StabMode m) { return "operators/" + to_string(m) + ".ops"; }
std::string operators_info(StabMode m) { return "operators/" + to_string(m) + ".json"; }
std::string trajectory(StabMode m) { return "online/" + to_string(m) + "/trajectory.csv"; }
std::string online_info(StabMode m) { return "online/" + to_string(m) + "/online.json"; }
std::string reconstruction(StabMode m, const std::string& f) { return "online/" + to_string(m) + "/" + f + ".snp"; }
}  // namespace artifacts

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<std::string> kFlowFields{"v", "u", "q", "qbar"};
const std::vector<std::string> kPodFields{"v", "q", "u", "qbar", "s", "sbar"};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", x);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ConfigError("cannot open " + p.string());
  return json::parse(is);
}

SnapshotMatrix first_columns(const SnapshotMatrix& s, int n) {
  if (n > s.cols()) {
    throw ConfigError(s.name + ": " + std::to_string(n) + " modes requested, " + std::to_string(s.cols()) + " stored");
  }
  SnapshotMatrix out = s;
  out.data = s.data.leftCols(n);
  out.times.resize(static_cast<std::size_t>(n));
  return out;
}

AeroReference aero_reference(const RunConfig& c) {
  AeroReference a;
  a.rho = c.physics.rho;
  a.mu = c.physics.mu;
  return a;
}

/// Height of the inlet patch, which must start at y = 0.
double inlet_height(const Mesh& mesh) {
  const int p = mesh.patch_index("inlet");
  if (p < 0) throw ConfigError("mesh has no 'inlet' patch");
  const Patch& patch = mesh.patches()[static_cast<std::size_t>(p)];
  double lo = 1e300, hi = -1e300;
  for (int f = patch.start; f < patch.start + patch.size; ++f) {
    const double y = mesh.face_centroid(f).y(), h = 0.5 * mesh.face_mag(f);
    lo = std::min(lo, y - h);
    hi = std::max(hi, y + h);
  }
  if (std::abs(lo) > 1e-9 * std::max(1.0, hi)) throw ConfigError("the inlet patch must start at y = 0");
  return hi;
}

/// Evolve and filter velocity spaces of one mode plus the pressure bases.
struct ModeSpaces {
  EnrichedSpace evolve, filter;
  SnapshotMatrix q, qbar;
};

}  // namespace

std::string hash_string(const std::string& s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return hex64(h);
}

std::string hash_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return "";
  std::uint64_t h = kFnvOffset;
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= kFnvPrime;
    }
  }
  return hex64(h);
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw ConfigError("output directory " + dir.string() + " is locked by another run (remove " + path_.string() +
                      " if that run is gone)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto w = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Pipeline::Pipeline(RunConfig cfg, std::ostream* log) : cfg_(std::move(cfg)), dir_(cfg_.output_dir), log_(log) {
  validate(cfg_);
  lock_ = std::make_unique<DirectoryLock>(dir_);
  const fs::path mp = dir_ / artifacts::manifest;
  if (fs::exists(mp)) {
    std::ifstream is(mp);
    try {
      manifest_ = ordered_json::parse(is);
    } catch (const std::exception&) {
      manifest_ = ordered_json::object();
    }
  }
  if (!manifest_.is_object() || !manifest_.contains("stages")) {
    manifest_ = ordered_json::object();
    manifest_["version"] = 1;
    manifest_["stages"] = ordered_json::object();
  }
  manifest_["config"] = config_to_json(cfg_);
}

Pipeline::~Pipeline() = default;

void Pipeline::say(const std::string& msg) const {
  if (log_) *log_ << msg << std::endl;
}

void Pipeline::save_manifest() const { write_text(dir_ / artifacts::manifest, manifest_.dump(2) + "\n"); }

std::vector<std::string> Pipeline::recorded_stages() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : manifest_.at("stages").items()) out.push_back(k);
  return out;
}

bool Pipeline::stage_valid(const std::string& name, const std::string& input_hash) const {
  const auto& st = manifest_.at("stages");
  if (!st.contains(name)) return false;
  const auto& s = st.at(name);
  if (s.value("status", "") != "done" || s.value("input", "") != input_hash) return false;
  for (const auto& [rel, h] : s.at("outputs").items()) {
    if (hash_file(dir_ / rel) != h.get<std::string>()) return false;
  }
  return true;
}

std::string Pipeline::output_hash(const std::string& stage, const std::string& rel) const {
  return manifest_.at("stages").at(stage).at("outputs").at(rel).get<std::string>();
}

void Pipeline::require(const std::string& stage, const std::string& command) const {
  const auto& st = manifest_.at("stages");
  bool ok = st.contains(stage) && st.at(stage).value("status", "") == "done";
  if (ok) {
    for (const auto& [rel, h] : st.at(stage).at("outputs").items()) {
      if (hash_file(dir_ / rel) != h.get<std::string>()) ok = false;
    }
  }
  if (!ok) {
    throw ConfigError("artifacts of stage '" + stage + "' are missing or stale in " + dir_.string() + "; run `romef " +
                      command + " --config <file>` first");
  }
}

StageOutcome Pipeline::run_stage(const std::string& name, const json& inputs, const std::vector<std::string>& upstream,
                                 const Body& body) {
  std::string key = name + "\n" + inputs.dump();
  bool upstream_ran = false;
  for (const auto& u : upstream) {
    key += "\n" + u + ":" + manifest_.at("stages").at(u).at("outputs").dump();
    upstream_ran = upstream_ran || std::find(ran_.begin(), ran_.end(), u) != ran_.end();
  }
  const std::string input_hash = hash_string(key);
  StageOutcome out{name, false, 0.0};
  if (!upstream_ran && stage_valid(name, input_hash)) {
    say("[" + name + "] up to date");
    return out;
  }
  say("[" + name + "] running");
  auto& st = manifest_["stages"];
  st[name] = {{"status", "running"}, {"input", input_hash}, {"outputs", ordered_json::object()}};
  save_manifest();
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> files;
  auto fail = [&](const std::exception& e) {
    st[name]["status"] = "failed";
    st[name]["error"] = e.what();
    save_manifest();
    return "stage '" + name + "' failed: " + e.what();
  };
  try {
    files = body();
  } catch (const ConfigError& e) {
    throw ConfigError(fail(e));
  } catch (const NumericalError& e) {
    throw NumericalError(fail(e));
  } catch (const FormatError& e) {
    throw FormatError(fail(e));
  } catch (const MeshError& e) {
    throw ConfigError(fail(e));
  } catch (const std::exception& e) {
    throw std::runtime_error(fail(e));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.ran = true;
  ordered_json outputs = ordered_json::object();
  for (const auto& f : files) outputs[f] = hash_file(dir_ / f);
  st[name] = {{"status", "done"}, {"input", input_hash}, {"outputs", outputs}, {"seconds", out.seconds}};
  save_manifest();
  ran_.push_back(name);
  say("[" + name + "] done in " + fixed(out.seconds, 1) + " s");
  return out;
}

const Mesh& Pipeline::mesh() {
  if (!mesh_) mesh_ = std::make_unique<Mesh>(load_mesh(dir_ / artifacts::mesh));
  return *mesh_;
}

// ---------------------------------------------------------------- stages

std::vector<std::string> Pipeline::stage_mesh() {
  Mesh m = cfg_.mesh.file.empty() ? generate_cylinder_mesh(cfg_.mesh.cells, cfg_.mesh.bias) : load_mesh(cfg_.mesh.file);
  save_mesh(m, dir_ / artifacts::mesh);
  mesh_.reset();
  const QualityReport q = m.quality();
  ordered_json info = {{"cells", m.n_cells()},
                       {"faces", m.n_faces()},
                       {"fingerprint", hex64(m.fingerprint())},
                       {"h_min", m.h_min()},
                       {"h_max", m.h_max()},
                       {"max_non_orthogonality_deg", q.max_non_orthogonality_deg},
                       {"avg_non_orthogonality_deg", q.avg_non_orthogonality_deg},
                       {"max_skewness", q.max_skewness},
                       {"max_aspect_ratio", q.max_aspect_ratio}};
  write_text(dir_ / "mesh.json", info.dump(2) + "\n");
  say("  " + std::to_string(m.n_cells()) + " cells");
  return {artifacts::mesh, "mesh.json"};
}

std::vector<std::string> Pipeline::stage_fom() {
  const Mesh& m = mesh();
  EvolveFilterSolver solver(m, cfg_.physics, cfg_.solver,
                            channel_flow_boundary(m, inlet_law(cfg_.inlet_law), inlet_height(m)));
  const int n_steps = cfg_.physics.n_steps();
  int done = 0;
  auto progress = [&](const StepReport& r) {
    ++done;
    if (n_steps >= 10 && done % (n_steps / 10) == 0) {
      say("  t = " + fixed(r.t, 3) + "  simplec iterations " + std::to_string(r.simplec_iterations));
    }
  };
  FomRunResult res = run_fom(solver, cfg_.sample_stride(), aero_reference(cfg_), progress);
  std::vector<std::string> files;
  const std::map<std::string, const SnapshotMatrix*> snaps{
      {"v", &res.v}, {"u", &res.u}, {"q", &res.q}, {"qbar", &res.qbar}};
  for (const auto& f : kFlowFields) {
    ensure_parent(dir_ / artifacts::fom_snapshots(f));
    save_snapshots(*snaps.at(f), dir_ / artifacts::fom_snapshots(f));
    files.push_back(artifacts::fom_snapshots(f));
  }
  std::ostringstream csv;
  csv << "t,cd,cl,cd_tn,cl_tn,max_u,continuity,simplec_iterations\n";
  for (const auto& h : res.history) {
    csv << num(h.t) << ',' << num(h.aero.cd) << ',' << num(h.aero.cl) << ',' << num(h.aero.cd_tn) << ','
        << num(h.aero.cl_tn) << ',' << num(h.max_u) << ',' << num(h.continuity) << ',' << h.simplec_iterations
        << '\n';
  }
  write_text(dir_ / artifacts::fom_history, csv.str());
  ordered_json info = {{"wall_seconds", res.wall_seconds},
                       {"n_steps", n_steps},
                       {"n_snapshots", res.v.cols()},
                       {"cells", m.n_cells()}};
  write_text(dir_ / artifacts::fom_info, info.dump(2) + "\n");
  files.push_back(artifacts::fom_history);
  files.push_back(artifacts::fom_info);
  return files;
}

std::vector<std::string> Pipeline::stage_lifting() {
  const Mesh& m = mesh();
  Lifting l = compute_lifting(m, inlet_height(m), inlet_law(cfg_.inlet_law), cfg_.lifting_tol, cfg_.lifting_max_iter,
                              cfg_.lifting_alpha);
  SnapshotMatrix s = SnapshotMatrix::empty("chi", m, 2);
  s.append(l.chi, 0.0);
  save_snapshots(s, dir_ / artifacts::lifting);
  say("  continuity " + num(l.max_divergence));
  return {artifacts::lifting};
}

std::vector<std::string> Pipeline::stage_supremizers() {
  const Mesh& m = mesh();
  SupremizerSolver sup(m, cfg_.supremizer_tol);
  std::vector<std::string> files;
  for (const auto& [p, s] : {std::pair<std::string, std::string>{"q", "s"}, {"qbar", "sbar"}}) {
    SnapshotMatrix pressure = load_snapshots(dir_ / artifacts::fom_snapshots(p));
    pressure.check_mesh(m);
    const SnapshotMatrix out = sup.solve_all(pressure, s);
    ensure_parent(dir_ / artifacts::supremizers(s));
    save_snapshots(out, dir_ / artifacts::supremizers(s));
    files.push_back(artifacts::supremizers(s));
  }
  return files;
}

std::vector<std::string> Pipeline::stage_pod() {
  const Mesh& m = mesh();
  const SnapshotMatrix chi = load_snapshots(dir_ / artifacts::lifting);
  chi.check_mesh(m);
  Lifting lift{chi.column(0), inlet_law(cfg_.inlet_law), m.fingerprint(), 0.0};

  std::map<std::string, SnapshotMatrix> snaps;
  for (const auto& f : kFlowFields) {
    snaps[f] = load_snapshots(dir_ / artifacts::fom_snapshots(f));
    snaps[f].check_mesh(m);
  }
  homogenize_columns(snaps["v"], lift);
  homogenize_columns(snaps["u"], lift);
  for (const auto& s : {"s", "sbar"}) {
    snaps[s] = load_snapshots(dir_ / artifacts::supremizers(s));
    snaps[s].check_mesh(m);
  }

  const bool use_sup1 = std::find(cfg_.modes.begin(), cfg_.modes.end(), StabMode::Sup1) != cfg_.modes.end();
  const bool use_sup2 = std::find(cfg_.modes.begin(), cfg_.modes.end(), StabMode::Sup2) != cfg_.modes.end();
  const std::map<std::string, int> sup_counts{
      {"s", std::max({1, use_sup1 ? cfg_.pod.sup1.s : 0, use_sup2 ? cfg_.pod.sup2.s : 0})},
      {"sbar", std::max({1, use_sup1 ? cfg_.pod.sup1.sbar : 0, use_sup2 ? cfg_.pod.sup2.sbar : 0})}};

  std::map<std::string, PodBasis> bases;
  ordered_json report = ordered_json::object(), used = ordered_json::object();
  std::vector<std::string> files;
  for (const auto& f : kPodFields) {
    const SnapshotMatrix& s = snaps.at(f);
    const Eigen::VectorXd w = snapshot_weights(m, s.ncomp);
    const Eigen::MatrixXd C = correlation_matrix(s, w);
    int n = 0;
    if (sup_counts.count(f)) {
      n = sup_counts.at(f);
    } else if (!cfg_.pod.counts.empty()) {
      n = cfg_.pod.counts.at(f);
    }
    PodBasis b = n > 0 ? compute_basis(C, s, w, PodRequest::modes(n))
                       : compute_basis(C, s, w, PodRequest::energy_fraction(cfg_.pod.energy));
    report[f] = modes_for_energy(b.cumulative, cfg_.pod.report_energy);
    used[f] = b.size();
    ensure_parent(dir_ / artifacts::pod_modes(f));
    save_basis(b, dir_ / artifacts::pod_modes(f), dir_ / artifacts::pod_eigenvalues(f));
    files.push_back(artifacts::pod_modes(f));
    files.push_back(artifacts::pod_eigenvalues(f));
    bases.emplace(f, std::move(b));
  }

  std::ostringstream csv;
  csv << "n";
  for (const auto& f : kPodFields) csv << ',' << f;
  csv << '\n';
  for (int k = 0; k < 4; ++k) {
    csv << k + 1;
    for (const auto& f : kPodFields) {
      const auto& c = bases.at(f).cumulative;
      csv << ',' << (k < c.size() ? num(c[k]) : "nan");
    }
    csv << '\n';
  }
  write_text(dir_ / artifacts::pod_energy, csv.str());
  ordered_json counts = {{"energy", cfg_.pod.report_energy}, {"at_energy", report}, {"used", used}};
  write_text(dir_ / artifacts::mode_counts, counts.dump(2) + "\n");
  files.push_back(artifacts::pod_energy);
  files.push_back(artifacts::mode_counts);
  say("  modes at energy " + fixed(cfg_.pod.report_energy, 4) + ": " + report.dump());
  return files;
}

namespace {

ModeSpaces build_spaces(const fs::path& dir, const Mesh& m, const RunConfig& cfg, StabMode mode) {
  const json counts = read_json(dir / artifacts::mode_counts).at("used");
  auto basis = [&](const std::string& f, int n) {
    SnapshotMatrix s = load_snapshots(dir / artifacts::pod_modes(f));
    s.check_mesh(m);
    return first_columns(s, n);
  };
  const SnapshotMatrix v = basis("v", counts.at("v").get<int>());
  const SnapshotMatrix u = basis("u", counts.at("u").get<int>());
  ModeSpaces sp;
  sp.q = basis("q", counts.at("q").get<int>());
  sp.qbar = basis("qbar", counts.at("qbar").get<int>());
  const Eigen::VectorXd w = snapshot_weights(m, 2);
  if (mode == StabMode::Sup1) {
    const SnapshotMatrix s = basis("s", cfg.pod.sup1.s), sb = basis("sbar", cfg.pod.sup1.sbar);
    sp.evolve = enrich({{"v", &v}, {"s", &s}}, w);
    sp.filter = enrich({{"u", &u}, {"sbar", &sb}}, w);
  } else if (mode == StabMode::Sup2) {
    const SnapshotMatrix s = basis("s", cfg.pod.sup2.s), sb = basis("sbar", cfg.pod.sup2.sbar);
    sp.evolve = enrich({{"v", &v}, {"s", &s}, {"sbar", &sb}}, w);
    sp.filter = enrich({{"u", &u}, {"sbar", &sb}, {"s", &s}}, w);
  } else {
    sp.evolve = enrich({{"v", &v}}, w);
    sp.filter = enrich({{"u", &u}}, w);
  }
  return sp;
}

Field load_lifting(const fs::path& dir, const Mesh& m) {
  const SnapshotMatrix chi = load_snapshots(dir / artifacts::lifting);
  chi.check_mesh(m);
  return chi.column(0);
}

double min_singular_value(const Eigen::MatrixXd& B) {
  if (B.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues().minCoeff();
}

}  // namespace

std::vector<std::string> Pipeline::stage_operators(StabMode mode) {
  const Mesh& m = mesh();
  const ModeSpaces sp = build_spaces(dir_, m, cfg_, mode);
  const Field chi = load_lifting(dir_, m);
  RomSpaces spaces{&sp.evolve.columns, &sp.q, &sp.filter.columns, &sp.qbar, &chi};
  AssemblyOptions opt;
  opt.mode = mode;
  opt.physics = cfg_.physics;
  opt.aero = aero_reference(cfg_);
  opt.inlet_law = cfg_.inlet_law;
  const ReducedOperators ops = assemble(m, spaces, opt);
  ensure_parent(dir_ / artifacts::operators(mode));
  save_operators(ops, dir_ / artifacts::operators(mode));

  // inf-sup surrogate: B must have full column rank on the pressure modes
  const double sb = min_singular_value(ops.mat("B")), sbb = min_singular_value(ops.mat("Bbar"));
  ordered_json info = {{"mode", to_string(mode)},
                       {"nv", sp.evolve.size()},
                       {"nq", sp.q.cols()},
                       {"nu", sp.filter.size()},
                       {"nqbar", sp.qbar.cols()},
                       {"sigma_min_B", sb},
                       {"sigma_min_Bbar", sbb},
                       {"gram_min_eigenvalue_evolve", sp.evolve.gram_min_eigenvalue},
                       {"gram_min_eigenvalue_filter", sp.filter.gram_min_eigenvalue},
                       {"gram_condition_evolve", sp.evolve.gram_condition},
                       {"gram_condition_filter", sp.filter.gram_condition},
                       {"inf_sup_warning", sb < 1e-8 || sbb < 1e-8}};
  write_text(dir_ / artifacts::operators_info(mode), info.dump(2) + "\n");
  if (sb < 1e-8 || sbb < 1e-8) {
    say("  warning: reduced gradient is rank deficient (sigma_min " + num(std::min(sb, sbb)) + ")");
  }
  return {artifacts::operators(mode), artifacts::operators_info(mode)};
}

std::vector<std::string> Pipeline::stage_online(StabMode mode) {
  const Mesh& m = mesh();
  const ReducedOperators ops = load_operators(dir_ / artifacts::operators(mode));
  const RomSolver solver(ops, mode);
  const RomTrajectory tr = run_rom(solver, cfg_.physics.t0, cfg_.physics.n_steps(), cfg_.timing_repeats);
  const RomDims d = solver.dims();

  std::ostringstream csv;
  csv << "t,cd,cl,cd_tn,cl_tn";
  for (int i = 0; i < d.nv; ++i) csv << ",beta_" << i + 1;
  for (int i = 0; i < d.nq; ++i) csv << ",gamma_" << i + 1;
  for (int i = 0; i < d.nu; ++i) csv << ",betabar_" << i + 1;
  for (int i = 0; i < d.nqbar; ++i) csv << ",gammabar_" << i + 1;
  csv << '\n';
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    csv << num(tr.t[k]);
    for (int i = 0; i < 4; ++i) csv << ',' << num(tr.aero[k][i]);
    for (int i = 0; i < d.nv; ++i) csv << ',' << num(tr.beta(i, c));
    for (int i = 0; i < d.nq; ++i) csv << ',' << num(tr.gamma(i, c));
    for (int i = 0; i < d.nu; ++i) csv << ',' << num(tr.beta_bar(i, c));
    for (int i = 0; i < d.nqbar; ++i) csv << ',' << num(tr.gamma_bar(i, c));
    csv << '\n';
  }
  write_text(dir_ / artifacts::trajectory(mode), csv.str());

  double rc_ev = std::numeric_limits<double>::infinity(), rc_f = rc_ev;
  for (std::size_t k = 1; k < tr.t.size(); ++k) {
    if (std::isfinite(tr.rcond_evolve[k])) rc_ev = std::min(rc_ev, tr.rcond_evolve[k]);
    if (std::isfinite(tr.rcond_filter[k])) rc_f = std::min(rc_f, tr.rcond_filter[k]);
  }
  ordered_json info = {{"mode", to_string(mode)},
                       {"online_seconds", tr.online_seconds},
                       {"timing_repeats", cfg_.timing_repeats},
                       {"n_steps", cfg_.physics.n_steps()},
                       {"min_rcond_evolve", std::isfinite(rc_ev) ? json(rc_ev) : json(nullptr)},
                       {"min_rcond_filter", std::isfinite(rc_f) ? json(rc_f) : json(nullptr)},
                       {"max_residual", tr.max_residual},
                       {"singular_steps", tr.singular_steps},
                       {"blow_up_step", tr.blow_up_step}};
  write_text(dir_ / artifacts::online_info(mode), info.dump(2) + "\n");
  if (tr.blow_up_step >= 0) say("  warning: " + to_string(mode) + " blew up at step " + std::to_string(tr.blow_up_step));

  // fields at the snapshot times
  const ModeSpaces sp = build_spaces(dir_, m, cfg_, mode);
  const Field chi = load_lifting(dir_, m);
  const Eigen::VectorXd chi_flat = flatten(chi);
  const auto law = inlet_law(cfg_.inlet_law);
  const int stride = cfg_.sample_stride(), n_s = cfg_.n_snapshots();
  std::map<std::string, SnapshotMatrix> rec{{"v", SnapshotMatrix::empty("v", m, 2)},
                                            {"u", SnapshotMatrix::empty("u", m, 2)},
                                            {"q", SnapshotMatrix::empty("q", m, 1)},
                                            {"qbar", SnapshotMatrix::empty("qbar", m, 1)}};
  for (auto& [f, s] : rec) s.data.resize(f[0] == 'q' ? sp.q.rows() : chi_flat.size(), n_s);
  for (int j = 0; j < n_s; ++j) {
    const Eigen::Index k = static_cast<Eigen::Index>(j + 1) * stride;
    const double t = tr.t[static_cast<std::size_t>(k)];
    const double g = law(t);
    rec["v"].data.col(j) = g * chi_flat + sp.evolve.columns.data * tr.beta.col(k);
    rec["u"].data.col(j) = g * chi_flat + sp.filter.columns.data * tr.beta_bar.col(k);
    rec["q"].data.col(j) = sp.q.data * tr.gamma.col(k);
    rec["qbar"].data.col(j) = sp.qbar.data * tr.gamma_bar.col(k);
    for (auto& [f, s] : rec) s.times.push_back(t);
  }
  std::vector<std::string> files{artifacts::trajectory(mode), artifacts::online_info(mode)};
  for (const auto& f : kFlowFields) {
    ensure_parent(dir_ / artifacts::reconstruction(mode, f));
    save_snapshots(rec.at(f), dir_ / artifacts::reconstruction(mode, f));
    files.push_back(artifacts::reconstruction(mode, f));
  }
  say("  online loop " + fixed(tr.online_seconds, 4) + " s");
  return files;
}

std::vector<std::string> Pipeline::stage_compare() {
  const Mesh& m = mesh();
  std::map<std::string, SnapshotMatrix> fom;
  for (const auto& f : kFlowFields) {
    fom[f] = load_snapshots(dir_ / artifacts::fom_snapshots(f));
    fom[f].check_mesh(m);
  }

  // FOM coefficient history
  std::vector<double> t_fom;
  std::vector<std::array<double, 4>> a_fom;
  {
    std::ifstream is(dir_ / artifacts::fom_history);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string cell;
      std::array<double, 5> v{};
      for (double& x : v) {
        std::getline(ls, cell, ',');
        x = std::stod(cell);
      }
      t_fom.push_back(v[0]);
      a_fom.push_back({v[1], v[2], v[3], v[4]});
    }
  }

  const json fom_info = read_json(dir_ / artifacts::fom_info);
  const double fom_seconds = fom_info.at("wall_seconds").get<double>();

  std::ostringstream summary, series, aero, aero_t;
  summary << "mode,field,min,avg,max\n";
  series << "mode,t,E_v,E_u,E_q,E_qbar\n";
  aero << "mode,E_cd,E_cl,E_cd_tn,E_cl_tn\n";
  ordered_json timing = {{"fom_wall_seconds", fom_seconds}, {"modes", ordered_json::object()}};

  std::vector<std::vector<std::array<double, 4>>> a_rom;
  for (StabMode mode : cfg_.modes) {
    std::map<std::string, std::vector<double>> err;
    for (const auto& f : kFlowFields) {
      SnapshotMatrix rom = load_snapshots(dir_ / artifacts::reconstruction(mode, f));
      rom.check_mesh(m);
      const SnapshotMatrix& ref = fom.at(f);
      if (rom.cols() != ref.cols()) throw ConfigError("reconstruction of " + f + " does not match the snapshots");
      for (Eigen::Index j = 0; j < ref.cols(); ++j) {
        if (std::abs(rom.times[static_cast<std::size_t>(j)] - ref.times[static_cast<std::size_t>(j)]) > 1e-9) {
          throw ConfigError("reconstruction times do not match the snapshot times");
        }
        err[f].push_back(relative_error(m, ref.column(j), rom.column(j)).value);
      }
    }
    for (const auto& f : kFlowFields) {
      const ErrorSummary s = summarize(err.at(f));
      summary << to_string(mode) << ',' << f << ',' << num(s.min) << ',' << num(s.avg) << ',' << num(s.max) << '\n';
    }
    for (std::size_t j = 0; j < err.at("v").size(); ++j) {
      series << to_string(mode) << ',' << num(fom.at("v").times[j]) << ',' << num(err["v"][j]) << ','
             << num(err["u"][j]) << ',' << num(err["q"][j]) << ',' << num(err["qbar"][j]) << '\n';
    }

    // coefficients from the trajectory
    std::vector<double> t_rom;
    std::vector<std::array<double, 4>> a;
    {
      std::ifstream is(dir_ / artifacts::trajectory(mode));
      std::string line;
      std::getline(is, line);
      while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::array<double, 5> v{};
        for (double& x : v) {
          std::getline(ls, cell, ',');
          x = cell == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
        }
        t_rom.push_back(v[0]);
        a.push_back({v[1], v[2], v[3], v[4]});
      }
    }
    aero << to_string(mode);
    for (int c = 0; c < 4; ++c) {
      std::vector<double> f(a_fom.size()), r(a.size());
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = a_fom[k][static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k][static_cast<std::size_t>(c)];
      aero << ',' << num(coefficient_error(t_fom, f, t_rom, r));
    }
    aero << '\n';
    a_rom.push_back(std::move(a));

    const json oi = read_json(dir_ / artifacts::online_info(mode));
    const double secs = oi.at("online_seconds").get<double>();
    timing["modes"][to_string(mode)] = {{"online_seconds", secs}, {"speedup", secs > 0 ? fom_seconds / secs : 0.0}};
  }

  aero_t << "t,fom_cd,fom_cl";
  for (StabMode mode : cfg_.modes) aero_t << ',' << to_string(mode) << "_cd," << to_string(mode) << "_cl";
  aero_t << '\n';
  for (std::size_t k = 0; k < t_fom.size(); ++k) {
    aero_t << num(t_fom[k]) << ',' << num(a_fom[k][0]) << ',' << num(a_fom[k][1]);
    for (const auto& a : a_rom) aero_t << ',' << num(a[k][0]) << ',' << num(a[k][1]);
    aero_t << '\n';
  }

  write_text(dir_ / artifacts::errors_summary, summary.str());
  write_text(dir_ / artifacts::errors_time, series.str());
  write_text(dir_ / artifacts::aero_errors, aero.str());
  write_text(dir_ / artifacts::aero_time, aero_t.str());
  write_text(dir_ / artifacts::timing, timing.dump(2) + "\n");
  return {artifacts::errors_summary, artifacts::errors_time, artifacts::aero_errors, artifacts::aero_time,
          artifacts::timing};
}

// ---------------------------------------------------------------- drivers

std::vector<StageOutcome> Pipeline::offline() {
  const json c = config_to_json(cfg_);
  std::vector<StageOutcome> out;
  json mesh_in = c.at("mesh");
  if (!cfg_.mesh.file.empty()) {
    if (!fs::exists(cfg_.mesh.file)) throw ConfigError("mesh file " + cfg_.mesh.file + " does not exist");
    mesh_in["hash"] = hash_file(cfg_.mesh.file);
  }
  out.push_back(run_stage("mesh", mesh_in, {}, [&] { return stage_mesh(); }));

  json solver = c.at("solver");
  solver.erase("supremizer_tol");
  const json fom_in = {{"physics", c.at("physics")},
                       {"inlet_law", cfg_.inlet_law},
                       {"snapshots", c.at("snapshots")},
                       {"solver", solver}};
  out.push_back(run_stage("fom", fom_in, {"mesh"}, [&] { return stage_fom(); }));
  out.push_back(run_stage("lifting", {{"lifting", c.at("lifting")}, {"inlet_law", cfg_.inlet_law}}, {"mesh"},
                          [&] { return stage_lifting(); }));
  out.push_back(run_stage("supremizers", {{"tol", cfg_.supremizer_tol}}, {"mesh", "fom"},
                          [&] { return stage_supremizers(); }));
  json modes = json::array();
  for (StabMode m : cfg_.modes) modes.push_back(to_string(m));
  out.push_back(run_stage("pod", {{"pod", c.at("pod")}, {"modes", modes}, {"inlet_law", cfg_.inlet_law}},
                          {"mesh", "fom", "lifting", "supremizers"}, [&] { return stage_pod(); }));
  for (StabMode m : cfg_.modes) {
    const json in = {{"mode", to_string(m)}, {"physics", c.at("physics")}, {"pod", c.at("pod")},
                     {"inlet_law", cfg_.inlet_law}};
    out.push_back(run_stage("operators:" + to_string(m), in, {"mesh", "lifting", "pod"},
                            [&, m] { return stage_operators(m); }));
  }
  return out;
}

StageOutcome Pipeline::online(StabMode mode) {
  if (std::find(cfg_.modes.begin(), cfg_.modes.end(), mode) == cfg_.modes.end()) {
    throw ConfigError("mode " + to_string(mode) + " is not listed in the config's modes");
  }
  const std::string ops = "operators:" + to_string(mode);
  for (const auto& s : {std::string("mesh"), std::string("lifting"), std::string("pod"), ops}) require(s, "offline");
  const json in = {{"timing_repeats", cfg_.timing_repeats}, {"physics", config_to_json(cfg_).at("physics")}};
  return run_stage("online:" + to_string(mode), in, {"mesh", "lifting", "pod", ops},
                   [&] { return stage_online(mode); });
}

std::vector<StageOutcome> Pipeline::compare() {
  std::vector<StageOutcome> out;
  require("fom", "offline");
  for (StabMode m : cfg_.modes) out.push_back(online(m));
  std::vector<std::string> up{"mesh", "fom"};
  json modes = json::array();
  for (StabMode m : cfg_.modes) {
    up.push_back("online:" + to_string(m));
    modes.push_back(to_string(m));
  }
  out.push_back(run_stage("compare", {{"modes", modes}}, up, [&] { return stage_compare(); }));
  return out;
}

}  // namespace romef
