#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "../common/temp_dir.hpp"
#include "romef/config.hpp"
#include "romef/mesh.hpp"

using namespace romef;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run romef_cli(const romef::testing::TempDir& dir, const std::string& args) {
  const fs::path out = dir / "stdout", err = dir / "stderr";
  const std::string cmd = "env -u ROMEF_OUTPUT_DIR " + std::string(ROMEF_CLI_PATH) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string tiny_config(const fs::path& out, double dt = 0.01, double mu = 1e-3) {
  nlohmann::json j = {{"preset", "ci"},
                      {"mesh", {{"cells", 300}}},
                      {"physics", {{"dt", dt}, {"T", 0.4}, {"mu", mu}}},
                      {"snapshots", {{"interval", 0.1}}},
                      {"inlet_law", "unit"},
                      {"pod", {{"supremizers", {{"sup1", {{"s", 3}, {"sbar", 2}}}}}}},
                      {"online", {{"timing_repeats", 1}}},
                      {"output_dir", out.string()}};
  return j.dump();
}

}  // namespace

TEST_CASE("usage errors") {
  romef::testing::TempDir dir("cli");
  CHECK(romef_cli(dir, "").code == 2);
  CHECK(romef_cli(dir, "--help").code == 0);
  CHECK(romef_cli(dir, "frobnicate").code == 2);
  CHECK(romef_cli(dir, "offline").code == 2);
  CHECK(romef_cli(dir, "online --preset ci").code == 2);
  CHECK(romef_cli(dir, "offline --preset ci --config x.json").code == 2);
  CHECK(romef_cli(dir, "offline --preset huge").code == 2);
}

TEST_CASE("validate-config") {
  romef::testing::TempDir dir("cli");
  const Run ok = romef_cli(dir, "validate-config --preset ci");
  CHECK(ok.code == 0);
  CHECK(config_from_json(nlohmann::json::parse(ok.out)) == preset_config("ci"));

  write(dir / "unknown.json", R"({"preset": "ci", "pysics": {}})");
  const Run bad = romef_cli(dir, "validate-config -c " + (dir / "unknown.json").string());
  CHECK(bad.code == 2);
  CHECK(bad.err.find("pysics") != std::string::npos);
  CHECK(romef_cli(dir, "validate-config -c " + (dir / "absent.json").string()).code == 2);

  const Run moved = romef_cli(dir, "validate-config --preset ci -o " + (dir / "elsewhere").string());
  CHECK(nlohmann::json::parse(moved.out).at("output_dir") == (dir / "elsewhere").string());
}

TEST_CASE("mesh-gen") {
  romef::testing::TempDir dir("cli");
  const Run r = romef_cli(dir, "mesh-gen --cells 400 -o " + (dir / "c.msh").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("non-orthogonality") != std::string::npos);
  const Mesh m = load_mesh(dir / "c.msh");
  CHECK(m.n_cells() == generate_cylinder_mesh(400, 2.0).n_cells());
  CHECK(romef_cli(dir, "mesh-gen --cells 10 -o " + (dir / "d.msh").string()).code == 2);
}

TEST_CASE("offline, online and their exit codes") {
  romef::testing::TempDir dir("cli");
  write(dir / "tiny.json", tiny_config(dir / "out"));
  const std::string cfg = " -q -c " + (dir / "tiny.json").string();

  CHECK(romef_cli(dir, "online -m ppe" + cfg).code == 2);
  CHECK(romef_cli(dir, "offline" + cfg).code == 0);
  CHECK(romef_cli(dir, "online -m sup4" + cfg).code == 2);
  const Run first = romef_cli(dir, "online -m ppe" + cfg);
  CHECK(first.code == 0);
  CHECK(first.out.find("online:ppe") != std::string::npos);
  CHECK(first.out.find("ran") != std::string::npos);
  CHECK(romef_cli(dir, "online -m ppe" + cfg).out.find("skipped") != std::string::npos);
  const Run cmp = romef_cli(dir, "compare" + cfg);
  CHECK(cmp.code == 0);
  CHECK(fs::exists(dir / "out" / "compare" / "errors_summary.csv"));

  // a far too large step for an almost inviscid flow: linear solves fail
  write(dir / "unstable.json", tiny_config(dir / "bad", 0.1, 1e-7));
  const Run nf = romef_cli(dir, "offline -q -c " + (dir / "unstable.json").string());
  CHECK(nf.code == 3);
  CHECK(nf.err.find("numerical failure") != std::string::npos);
}
