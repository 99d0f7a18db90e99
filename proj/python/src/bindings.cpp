#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "romef/config.hpp"
#include "romef/errors.hpp"
#include "romef/mesh.hpp"
#include "romef/pipeline.hpp"
#include "romef/pod.hpp"
#include "romef/postproc.hpp"
#include "romef/rom_online.hpp"
#include "romef/rom_ops.hpp"
#include "romef/snapshots.hpp"

namespace py = pybind11;
using namespace romef;

namespace {

using FArray = py::array_t<double, py::array::f_style>;

FArray tensor_to_numpy(const Tensor3& T) {
  FArray a({T.n0, T.n1, T.n2});
  std::copy(T.v.begin(), T.v.end(), a.mutable_data());
  return a;
}

Tensor3 numpy_to_tensor(const FArray& a) {
  if (a.ndim() != 3) throw py::value_error("a tensor must have three dimensions");
  Tensor3 T(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), T.v.begin());
  return T;
}

RunConfig config_from_py(const py::object& cfg) {
  const std::string text = py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  return config_from_json(nlohmann::json::parse(text));
}

py::object config_to_py(const RunConfig& c) {
  return py::module_::import("json").attr("loads")(config_to_json(c).dump());
}

py::list stages_to_py(const std::vector<StageOutcome>& v) {
  py::list out;
  for (const auto& s : v) out.append(py::make_tuple(s.name, s.ran, s.seconds));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Evolve-filter reduced order modelling core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<FingerprintError>(m, "FingerprintError", PyExc_ValueError);
  py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);

  py::class_<Patch>(m, "Patch")
      .def_readonly("name", &Patch::name)
      .def_readonly("start", &Patch::start)
      .def_readonly("size", &Patch::size)
      .def("__repr__", [](const Patch& p) {
        return "Patch(" + p.name + ", start=" + std::to_string(p.start) + ", size=" + std::to_string(p.size) + ")";
      });

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_cells", &Mesh::n_cells)
      .def_property_readonly("n_faces", &Mesh::n_faces)
      .def_property_readonly("n_internal_faces", &Mesh::n_internal_faces)
      .def_property_readonly("total_area", &Mesh::total_area)
      .def_property_readonly("fingerprint", &Mesh::fingerprint)
      .def_property_readonly("patches", &Mesh::patches)
      .def_property_readonly("cell_areas", &Mesh::cell_areas)
      .def_property_readonly("centroids",
                             [](const Mesh& mesh) {
                               Eigen::MatrixXd c(mesh.n_cells(), 2);
                               for (int i = 0; i < mesh.n_cells(); ++i) c.row(i) = mesh.centroid(i).transpose();
                               return c;
                             })
      .def("quality", [](const Mesh& mesh) {
        const QualityReport q = mesh.quality();
        py::dict d;
        d["max_non_orthogonality_deg"] = q.max_non_orthogonality_deg;
        d["avg_non_orthogonality_deg"] = q.avg_non_orthogonality_deg;
        d["max_skewness"] = q.max_skewness;
        d["max_aspect_ratio"] = q.max_aspect_ratio;
        return d;
      });

  m.def("generate_cylinder_mesh", [](int cells, double bias) { return generate_cylinder_mesh(cells, bias); },
        py::arg("cells") = 15900, py::arg("bias") = 2.0);
  m.def("generate_rectangle_mesh",
        [](int nx, int ny, double lx, double ly) { return generate_rectangle_mesh(nx, ny, lx, ly); }, py::arg("nx"),
        py::arg("ny"), py::arg("lx"), py::arg("ly"));
  m.def("load_mesh", &load_mesh);
  m.def("save_mesh", &save_mesh);

  py::class_<SnapshotMatrix>(m, "SnapshotMatrix")
      .def_readonly("name", &SnapshotMatrix::name)
      .def_readonly("ncomp", &SnapshotMatrix::ncomp)
      .def_readonly("n_cells", &SnapshotMatrix::n_cells)
      .def_readonly("n_bfaces", &SnapshotMatrix::n_bfaces)
      .def_readonly("fingerprint", &SnapshotMatrix::fingerprint)
      .def_readonly("times", &SnapshotMatrix::times)
      .def_readonly("data", &SnapshotMatrix::data)
      .def_property_readonly("shape", [](const SnapshotMatrix& s) { return py::make_tuple(s.rows(), s.cols()); });
  m.def("load_snapshots", &load_snapshots);
  m.def("save_snapshots", &save_snapshots);
  m.def("snapshot_weights", &snapshot_weights, py::arg("mesh"), py::arg("ncomp"));

  py::class_<PodBasis>(m, "PodBasis")
      .def_readonly("field", &PodBasis::field)
      .def_readonly("modes", &PodBasis::modes)
      .def_readonly("eigenvalues", &PodBasis::eigenvalues)
      .def_readonly("cumulative", &PodBasis::cumulative)
      .def_readonly("rank", &PodBasis::rank)
      .def_property_readonly("size", &PodBasis::size);
  m.def("correlation_matrix", &correlation_matrix, py::arg("snapshots"), py::arg("weights"));
  m.def(
      "compute_basis",
      [](const SnapshotMatrix& s, const Eigen::VectorXd& w, std::optional<int> modes, std::optional<double> energy) {
        if (modes.has_value() == energy.has_value()) throw ConfigError("give exactly one of modes and energy");
        const PodRequest req = modes ? PodRequest::modes(*modes) : PodRequest::energy_fraction(*energy);
        return compute_basis(correlation_matrix(s, w), s, w, req);
      },
      py::arg("snapshots"), py::arg("weights"), py::kw_only(), py::arg("modes") = py::none(),
      py::arg("energy") = py::none());
  m.def("modes_for_energy", &modes_for_energy, py::arg("cumulative"), py::arg("target"));
  m.def("reconstruction_error_sq", &reconstruction_error_sq);

  py::enum_<StabMode>(m, "StabMode")
      .value("NOS", StabMode::Nos)
      .value("PPE", StabMode::Ppe)
      .value("SUP1", StabMode::Sup1)
      .value("SUP2", StabMode::Sup2);
  m.def("parse_stab_mode", &parse_stab_mode);

  py::class_<ReducedOperators>(m, "ReducedOperators")
      .def(py::init<>())
      .def_readwrite("matrices", &ReducedOperators::matrices)
      .def_readwrite("meta", &ReducedOperators::meta)
      .def_property(
          "tensors",
          [](const ReducedOperators& o) {
            py::dict d;
            for (const auto& [k, T] : o.tensors) d[py::str(k)] = tensor_to_numpy(T);
            return d;
          },
          [](ReducedOperators& o, const std::map<std::string, FArray>& d) {
            o.tensors.clear();
            for (const auto& [k, a] : d) o.tensors[k] = numpy_to_tensor(a);
          })
      .def("has", &ReducedOperators::has);
  m.def("load_operators", &load_operators);
  m.def("save_operators", &save_operators);

  py::class_<RomTrajectory>(m, "RomTrajectory")
      .def_readonly("t", &RomTrajectory::t)
      .def_readonly("beta", &RomTrajectory::beta)
      .def_readonly("gamma", &RomTrajectory::gamma)
      .def_readonly("beta_bar", &RomTrajectory::beta_bar)
      .def_readonly("gamma_bar", &RomTrajectory::gamma_bar)
      .def_property_readonly("aero",
                             [](const RomTrajectory& t) {
                               Eigen::MatrixXd a(static_cast<Eigen::Index>(t.aero.size()), 4);
                               for (std::size_t i = 0; i < t.aero.size(); ++i)
                                 a.row(static_cast<Eigen::Index>(i)) = t.aero[i].transpose();
                               return a;
                             })
      .def_readonly("max_residual", &RomTrajectory::max_residual)
      .def_readonly("singular_steps", &RomTrajectory::singular_steps)
      .def_readonly("blow_up_step", &RomTrajectory::blow_up_step)
      .def_readonly("online_seconds", &RomTrajectory::online_seconds);

  m.def(
      "run_rom",
      [](const ReducedOperators& ops, StabMode mode, double t0, int n_steps, std::optional<double> rho,
         std::optional<double> mu, std::optional<double> mu_bar, std::optional<double> dt,
         std::optional<std::function<double(double)>> law) {
        if (rho || mu || mu_bar || dt || law) {
          if (!(rho && mu && mu_bar && dt && law)) throw ConfigError("explicit physics needs rho, mu, mu_bar, dt and law");
          std::function<double(double)> g = *law;
          const RomSolver solver(ops, mode, *rho, *mu, *mu_bar, *dt, g);
          return run_rom(solver, t0, n_steps);
        }
        const RomSolver solver(ops, mode);
        return run_rom(solver, t0, n_steps);
      },
      py::arg("ops"), py::arg("mode"), py::arg("t0"), py::arg("n_steps"), py::kw_only(), py::arg("rho") = py::none(),
      py::arg("mu") = py::none(), py::arg("mu_bar") = py::none(), py::arg("dt") = py::none(),
      py::arg("law") = py::none());

  m.def("summarize", [](const std::vector<double>& s) {
    const ErrorSummary e = summarize(s);
    return py::make_tuple(e.min, e.avg, e.max);
  });

  m.def("preset_config", [](const std::string& name) { return config_to_py(preset_config(name)); });
  m.def("preset_names", &preset_names);
  m.def("validate_config", [](const py::object& cfg) { return config_to_py(config_from_py(cfg)); },
        "Parses and validates a configuration mapping; returns it with every default filled in.");

  m.def(
      "offline",
      [](const py::object& cfg) {
        Pipeline p(config_from_py(cfg));
        return stages_to_py(p.offline());
      },
      "Runs (or resumes) the offline stages. Returns (stage, ran, seconds) tuples.");
  m.def("online", [](const py::object& cfg, StabMode mode) {
    Pipeline p(config_from_py(cfg));
    return stages_to_py({p.online(mode)});
  });
  m.def("compare", [](const py::object& cfg) {
    Pipeline p(config_from_py(cfg));
    return stages_to_py(p.compare());
  });
}
