// romef: offline/online driver for the evolve-filter reduced order model.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure,
// 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "romef/config.hpp"
#include "romef/errors.hpp"
#include "romef/mesh.hpp"
#include "romef/pipeline.hpp"

using namespace romef;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Source {
  std::string config;
  std::string preset;
  std::string output;
};

void add_source(CLI::App* cmd, Source& s) {
  auto* c = cmd->add_option("-c,--config", s.config, "JSON run configuration");
  auto* p = cmd->add_option("-p,--preset", s.preset, "bundled preset (ci, paper) instead of a file");
  c->excludes(p);
  cmd->add_option("-o,--output", s.output, "output directory (overrides config and ROMEF_OUTPUT_DIR)");
}

RunConfig resolve(const Source& s) {
  RunConfig c;
  if (!s.config.empty()) {
    c = load_config(s.config);
  } else if (!s.preset.empty()) {
    c = preset_config(s.preset);
    if (const char* env = std::getenv("ROMEF_OUTPUT_DIR"); env && *env) c.output_dir = env;
  } else {
    throw ConfigError("give --config <file> or --preset <name>");
  }
  if (!s.output.empty()) c.output_dir = s.output;
  validate(c);
  return c;
}

void report(const std::vector<StageOutcome>& stages) {
  for (const auto& s : stages) {
    std::printf("%-18s %s\n", s.name.c_str(), s.ran ? "ran" : "skipped");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve-filter reduced order modelling: snapshots, POD, reduced operators, online runs"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress output");

  Source off_src, on_src, cmp_src, val_src;
  auto* off = app.add_subcommand("offline", "FOM snapshots, lifting, supremizers, POD and reduced operators");
  add_source(off, off_src);

  auto* on = app.add_subcommand("online", "run one reduced model and reconstruct its fields");
  add_source(on, on_src);
  std::string mode_name;
  on->add_option("-m,--mode", mode_name, "stabilisation: nos, ppe, sup1 or sup2")->required();

  auto* cmp = app.add_subcommand("compare", "online runs of every configured mode plus error tables");
  add_source(cmp, cmp_src);

  auto* mg = app.add_subcommand("mesh-gen", "generate the cylinder mesh and print its quality");
  int cells = 15900;
  double bias = 2.0;
  std::string mesh_out;
  mg->add_option("--cells", cells, "target cell count")->capture_default_str();
  mg->add_option("--bias", bias, "grading ratio of the refined blocks")->capture_default_str();
  mg->add_option("-o,--out", mesh_out, "mesh file to write")->required();

  auto* val = app.add_subcommand("validate-config", "check a configuration and print it with all defaults");
  add_source(val, val_src);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  std::ostream* log = quiet ? nullptr : &std::cerr;
  try {
    if (*off) {
      Pipeline p(resolve(off_src), log);
      report(p.offline());
    } else if (*on) {
      const StabMode mode = parse_stab_mode(mode_name);
      Pipeline p(resolve(on_src), log);
      report({p.online(mode)});
    } else if (*cmp) {
      Pipeline p(resolve(cmp_src), log);
      report(p.compare());
      std::ifstream is(p.path(artifacts::errors_summary));
      std::cout << is.rdbuf();
    } else if (*mg) {
      const Mesh m = generate_cylinder_mesh(cells, bias);
      save_mesh(m, mesh_out);
      const QualityReport q = m.quality();
      std::printf("cells %d  faces %d  h_min %.3e  h_max %.3e\n", m.n_cells(), m.n_faces(), m.h_min(), m.h_max());
      std::printf("non-orthogonality max %.1f deg avg %.1f deg  skewness %.2f  aspect ratio %.2f\n",
                  q.max_non_orthogonality_deg, q.avg_non_orthogonality_deg, q.max_skewness, q.max_aspect_ratio);
    } else if (*val) {
      std::cout << config_to_json(resolve(val_src)).dump(2) << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "romef: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const FormatError& e) {
    std::cerr << "romef: bad artifact: " << e.what() << "\n";
    return kConfigError;
  } catch (const MeshError& e) {
    std::cerr << "romef: mesh error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "romef: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "romef: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
