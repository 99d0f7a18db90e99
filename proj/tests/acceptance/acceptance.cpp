// End-to-end acceptance run: one PASS/FAIL line per criterion.
//
// Criteria 2 and 4-8 use the paper preset artifacts under
// <dir>/paper, produced (or resumed) by the offline and compare stages.
// Criterion 9 runs the ci preset twice from scratch into <dir>/ci_a and
// <dir>/ci_b. The default <dir> is build/acceptance, ROMEF_ACCEPTANCE_DIR
// overrides it.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "../common/flow_cases.hpp"
#include "../common/oracles.hpp"
#include "romef/pipeline.hpp"
#include "romef/pod.hpp"
#include "romef/rom_assembly.hpp"
#include "romef/snapshots.hpp"

using namespace romef;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// rows of a CSV with a header; key columns joined by ','.
std::map<std::string, std::map<std::string, double>> read_table(const fs::path& p, int n_keys) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  for (std::stringstream hs(line); std::getline(hs, line, ',');) header.push_back(line);
  std::map<std::string, std::map<std::string, double>> out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    for (std::stringstream ls(line); std::getline(ls, line, ',');) cells.push_back(line);
    std::string key;
    for (int k = 0; k < n_keys; ++k) key += (k ? "," : "") + cells[static_cast<std::size_t>(k)];
    for (std::size_t c = static_cast<std::size_t>(n_keys); c < cells.size(); ++c) out[key][header[c]] = std::stod(cells[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------

Verdict operator_oracle() {
  struct Spaces {
    SnapshotMatrix v, q, u, qbar;
    Field chi;
    RomSpaces view() const { return {&v, &q, &u, &qbar, &chi}; }
  };
  auto spaces = [](const Mesh& mesh, int nv, int nq, int nu, int nqb, unsigned seed) {
    std::mt19937 rng(seed);
    Spaces s;
    s.v = testing::smooth_random_space(mesh, "v", 2, nv, rng);
    s.q = testing::smooth_random_space(mesh, "q", 1, nq, rng);
    s.u = testing::smooth_random_space(mesh, "u", 2, nu, rng);
    s.qbar = testing::smooth_random_space(mesh, "qbar", 1, nqb, rng);
    s.chi = testing::smooth_random_field(mesh, 2, rng);
    return s;
  };

  double worst = 0.0;
  std::string worst_name;
  int checked = 0, largest = 0;
  auto record = [&](const std::vector<testing::OracleDeviation>& devs, const std::string& where) {
    for (const auto& d : devs) {
      ++checked;
      if (!(d.max_abs <= worst)) {
        worst = d.max_abs;
        worst_name = where + ":" + d.name;
      }
    }
  };

  const Mesh cyl = generate_cylinder_mesh(400, 2.0);
  largest = cyl.n_cells();
  const auto probed = testing::probe_library_operators(cyl, {"outlet"}, AeroReference{});
  for (StabMode mode : {StabMode::Nos, StabMode::Ppe, StabMode::Sup1, StabMode::Sup2}) {
    const Spaces s = spaces(cyl, 3, 2, 3, 2, 11 + static_cast<unsigned>(mode));
    AssemblyOptions opt;
    opt.mode = mode;
    record(testing::projection_oracle(cyl, s.view(), probed, assemble(cyl, s.view(), opt)), "cylinder/" + to_string(mode));
  }
  for (auto [nx, ny] : {std::pair{2, 2}, std::pair{12, 5}}) {
    const Mesh rect = generate_rectangle_mesh(nx, ny, 1.2, 0.5, {"inlet", "outlet", "walls", "cylinder"});
    const auto stencil = testing::rectangle_stencil_operators(rect, nx, ny, {"outlet"}, AeroReference{});
    for (StabMode mode : {StabMode::Ppe, StabMode::Sup2}) {
      const Spaces s = spaces(rect, 2, 2, 2, 1, 9 + static_cast<unsigned>(nx));
      AssemblyOptions opt;
      opt.mode = mode;
      record(testing::projection_oracle(rect, s.view(), stencil, assemble(rect, s.view(), opt)),
             fmt("rect%dx%d/", nx, ny) + to_string(mode));
    }
  }
  return {largest <= 500 && worst <= 1e-11,
          fmt("%d operators, meshes <= %d cells, max deviation %.2e (%s), tol 1e-11", checked, largest, worst,
              worst_name.c_str())};
}

Verdict pod_properties(const fs::path& paper) {
  const Mesh mesh = load_mesh(paper / artifacts::mesh);
  double ortho = 0.0, recon = 0.0;
  bool monotone = true;
  for (const std::string f : {"v", "q", "u", "qbar"}) {
    const SnapshotMatrix s = load_snapshots(paper / artifacts::fom_snapshots(f));
    const Eigen::VectorXd w = snapshot_weights(mesh, s.ncomp);
    const Eigen::MatrixXd C = correlation_matrix(s, w);
    const PodBasis probe = compute_basis(C, s, w, PodRequest::modes(1));
    int k = 0;
    while (k < std::min<int>(20, static_cast<int>(probe.eigenvalues.size())) &&
           probe.eigenvalues[k] >= 1e-10 * probe.eigenvalues[0])
      ++k;
    const PodBasis pod = compute_basis(C, s, w, PodRequest::modes(k));
    const Eigen::MatrixXd G = pod.modes.data.transpose() * w.asDiagonal() * pod.modes.data;
    ortho = std::max(ortho, (G - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
    const double total = pod.eigenvalues.sum();
    for (int m = 1; m <= k; ++m) {
      const double tail = pod.eigenvalues.tail(pod.eigenvalues.size() - m).sum();
      recon = std::max(recon, std::abs(reconstruction_error_sq(pod, w, s, m) - tail) / total);
    }
    for (Eigen::Index i = 1; i < pod.cumulative.size(); ++i) monotone = monotone && pod.cumulative[i] >= pod.cumulative[i - 1];
  }
  return {ortho <= 1e-10 && recon <= 1e-8 && monotone,
          fmt("paper-preset snapshots v,q,u,qbar: orthonormality %.2e (tol 1e-10), reconstruction identity %.2e (tol 1e-8), "
              "cumulative energy %s",
              ortho, recon, monotone ? "monotone" : "NOT monotone")};
}

Verdict fom_verification() {
  const auto p = testing::run_poiseuille();
  const double rel = std::abs(p.centerline - p.expected) / p.expected;
  const auto a = testing::run_taylor_green(32, 0.01);
  const auto b = testing::run_taylor_green(64, 0.005);
  const double order = std::log2(a.ev / b.ev);
  return {rel <= 0.01 && order >= 1.7 && order <= 2.2,
          fmt("Poiseuille centerline %.6f vs %.6f (rel %.2e, tol 1e-2); manufactured solution order %.3f on 32->64 "
              "(range [1.7, 2.2])",
              p.centerline, p.expected, rel, order)};
}

Verdict mode_counts(const fs::path& paper) {
  const nlohmann::json j = nlohmann::json::parse(slurp(paper / artifacts::mode_counts));
  const auto& at = j.at("at_energy");
  const std::map<std::string, int> want{{"v", 2}, {"q", 2}, {"u", 2}, {"qbar", 1}};
  bool exact = true, within_one = true;
  std::string got;
  for (const auto& [f, n] : want) {
    const int k = at.at(f).get<int>();
    exact = exact && k == n;
    within_one = within_one && std::abs(k - n) <= 1;
    got += fmt("%s=%d ", f.c_str(), k);
  }
  const auto ev = read_table(paper / artifacts::pod_eigenvalues("v"), 1);
  const double two = ev.at("2").at("cumulative");
  if (exact) return {true, "counts at 99% energy: " + got + "(expected 2/2/2/1)" + fmt("; two v modes hold %.6f", two)};
  return {within_one && two >= 0.9999,
          "counts at 99% energy: " + got + "differ from 2/2/2/1; fallback: two v modes hold " + fmt("%.6f (need 0.9999)", two)};
}

struct BenchmarkTables {
  std::map<std::string, std::map<std::string, double>> errors, aero;
  nlohmann::json timing;
};

Verdict ordering(const BenchmarkTables& t) {
  auto avg = [&](const std::string& mode, const std::string& f) { return t.errors.at(mode + "," + f).at("avg"); };
  bool ok = true;
  std::string d;
  for (const std::string m : {"ppe", "sup2"}) {
    ok = ok && avg(m, "v") <= 0.1 && avg(m, "u") <= 0.1;
    d += fmt("%s E_v %.3e E_u %.3e; ", m.c_str(), avg(m, "v"), avg(m, "u"));
  }
  const double nos_ratio = avg("nos", "v") / avg("ppe", "v");
  const double sup_ratio = avg("sup1", "qbar") / avg("sup2", "qbar");
  ok = ok && nos_ratio >= 10.0 && sup_ratio >= 2.0;
  d += fmt("NOS/PPE E_v %.3g (need >= 10); SUP1/SUP2 E_qbar %.3g (need >= 2)", nos_ratio, sup_ratio);
  return {ok, d};
}

Verdict magnitudes(const BenchmarkTables& t) {
  const std::map<std::string, std::array<double, 4>> ref{{"ppe", {2.3e-2, 2.4e-2, 1.4e-1, 1.3e-1}},
                                                         {"sup2", {2.6e-2, 2.6e-2, 1.7e-1, 6e-2}}};
  const std::array<std::string, 4> fields{"v", "u", "q", "qbar"};
  bool ok = true;
  std::string d;
  for (const auto& [m, r] : ref) {
    d += m + ":";
    for (std::size_t i = 0; i < 4; ++i) {
      const double a = t.errors.at(m + "," + fields[i]).at("avg");
      const bool in = a >= 0.5 * r[i] && a <= 2.0 * r[i];
      ok = ok && in;
      d += fmt(" %s %.3e/%.1e%s", fields[i].c_str(), a, r[i], in ? "" : "(out)");
    }
    d += "; ";
  }
  return {ok, d + "factor 2"};
}

Verdict coefficients(const BenchmarkTables& t) {
  bool ok = true;
  std::string d;
  for (const std::string m : {"ppe", "sup2"}) {
    const double cd = t.aero.at(m).at("E_cd"), cl = t.aero.at(m).at("E_cl");
    ok = ok && cd <= 0.18 && cl <= 0.28;
    d += fmt("%s E_cd %.3f E_cl %.3f; ", m.c_str(), cd, cl);
  }
  return {ok, d + "limits 0.18 / 0.28"};
}

Verdict speedup(const BenchmarkTables& t) {
  bool ok = true;
  std::string d = fmt("FOM %.1f s;", t.timing.at("fom_wall_seconds").get<double>());
  for (const auto& [m, v] : t.timing.at("modes").items()) {
    const double s = v.at("speedup").get<double>();
    ok = ok && s >= 100.0;
    d += fmt(" %s %.0fx", m.c_str(), s);
  }
  const double ppe = t.timing.at("modes").at("ppe").at("online_seconds").get<double>();
  const double sup2 = t.timing.at("modes").at("sup2").at("online_seconds").get<double>();
  ok = ok && ppe < sup2;
  return {ok, d + fmt("; online PPE %.4f s vs SUP2 %.4f s", ppe, sup2)};
}

Verdict determinism(const fs::path& root, std::ostream* log) {
  std::vector<fs::path> dirs{root / "ci_a", root / "ci_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    RunConfig c = preset_config("ci");
    c.output_dir = d.string();
    Pipeline p(c, log);
    p.offline();
    p.compare();
  }
  std::set<fs::path> csv;
  for (const auto& d : dirs)
    for (const auto& e : fs::recursive_directory_iterator(d))
      if (e.path().extension() == ".csv") csv.insert(fs::relative(e.path(), d));
  int same = 0;
  std::string diff;
  for (const auto& rel : csv) {
    const fs::path a = dirs[0] / rel, b = dirs[1] / rel;
    if (fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b))
      ++same;
    else
      diff += " " + rel.string();
  }
  return {diff.empty() && same > 0,
          fmt("ci preset twice: %d of %zu CSV files byte-identical", same, csv.size()) + (diff.empty() ? "" : ";" + diff)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only;
  bool verbose = false;
  app.add_option("--only", only, "comma-separated criteria to evaluate (default all)");
  app.add_flag("-v,--verbose", verbose, "stage progress on stderr");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  for (std::stringstream ss(only); std::getline(ss, only, ',');) selected.insert(std::stoi(only));
  auto want = [&](int c) { return selected.empty() || selected.count(c); };

  fs::path root = "acceptance";
  if (const char* env = std::getenv("ROMEF_ACCEPTANCE_DIR"); env && *env) root = env;
  std::ostream* log = verbose ? &std::cerr : nullptr;

  std::map<int, Verdict> v;
  auto guarded = [&](int c, auto&& fn) {
    if (!want(c)) return;
    try {
      v[c] = fn();
    } catch (const std::exception& e) {
      v[c] = {false, std::string("error: ") + e.what()};
    }
  };

  const fs::path paper = root / "paper";
  BenchmarkTables tables;
  bool paper_ok = false;
  std::string paper_error;
  if (want(2) || want(4) || want(5) || want(6) || want(7) || want(8)) {
    try {
      RunConfig c = preset_config("paper");
      c.output_dir = paper.string();
      Pipeline p(c, log);
      p.offline();
      p.compare();
      tables.errors = read_table(p.path(artifacts::errors_summary), 2);
      tables.aero = read_table(p.path(artifacts::aero_errors), 1);
      tables.timing = nlohmann::json::parse(slurp(p.path(artifacts::timing)));
      paper_ok = true;
    } catch (const std::exception& e) {
      paper_error = e.what();
    }
  }
  auto paper_guarded = [&](int c, auto&& fn) {
    if (!want(c)) return;
    if (!paper_ok) {
      v[c] = {false, "paper preset run failed: " + paper_error};
      return;
    }
    guarded(c, fn);
  };

  guarded(1, operator_oracle);
  paper_guarded(2, [&] { return pod_properties(paper); });
  guarded(3, fom_verification);
  paper_guarded(4, [&] { return mode_counts(paper); });
  paper_guarded(5, [&] { return ordering(tables); });
  paper_guarded(6, [&] { return magnitudes(tables); });
  paper_guarded(7, [&] { return coefficients(tables); });
  paper_guarded(8, [&] { return speedup(tables); });
  guarded(9, [&] { return determinism(root, log); });

  int failed = 0;
  for (const auto& [c, r] : v) {
    std::printf("criterion %d %s  %s\n", c, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", v.size(), failed);
  return failed == 0 ? 0 : 1;
}
