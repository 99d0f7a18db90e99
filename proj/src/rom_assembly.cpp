#include "romef/rom_assembly.hpp"

#include <algorithm>

#include <json.hpp>

#include "romef/errors.hpp"
#include "romef/fv.hpp"

namespace romef {

namespace {

/// FV images of one velocity trial column.
struct VelocityImage {
  Field f;
  Eigen::MatrixXd lap;     // cell integrals, nc x 2
  Eigen::VectorXd div;     // cell integrals
  Eigen::VectorXd flux;    // face fluxes
  Eigen::VectorXd curl_b;  // scalar curl at the owner cell of each boundary face
};

struct PressureImage {
  Field f;
  Eigen::MatrixXd grad;    // per unit area, nc x 2
  Eigen::VectorXd tang_b;  // n x grad psi at boundary faces, 0 on fixed-pressure patches
};

VelocityImage velocity_image(const Mesh& mesh, Field f) {
  VelocityImage im;
  const int ni = mesh.n_internal_faces(), nb = mesh.n_faces() - ni;
  im.lap = apply_laplacian(mesh, 1.0, f);
  im.flux = face_flux(mesh, f);
  im.div = surface_sum(mesh, im.flux);
  const Eigen::MatrixXd g = gauss_gradient(mesh, f);
  im.curl_b.resize(nb);
  for (int i = 0; i < nb; ++i) {
    const int o = mesh.owner(ni + i);
    im.curl_b[i] = g(o, 2) - g(o, 1);
  }
  im.f = std::move(f);
  return im;
}

PressureImage pressure_image(const Mesh& mesh, Field f, const std::vector<bool>& fixed_patch) {
  PressureImage im;
  const int ni = mesh.n_internal_faces(), nb = mesh.n_faces() - ni;
  im.grad = gauss_gradient(mesh, f);
  im.tang_b = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < nb; ++i) {
    const int face = ni + i;
    if (fixed_patch[static_cast<std::size_t>(mesh.face_patch(face))]) continue;
    const int o = mesh.owner(face);
    const Vec2 n = mesh.face_area(face) / mesh.face_mag(face);
    im.tang_b[i] = n.x() * im.grad(o, 1) - n.y() * im.grad(o, 0);
  }
  im.f = std::move(f);
  return im;
}

double cell_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

double cell_dot_w(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& V) {
  return ((a.array() * b.array()).colwise() * V.array()).sum();
}

std::vector<VelocityImage> augmented_images(const Mesh& mesh, const Field& chi, const SnapshotMatrix& modes) {
  std::vector<VelocityImage> out;
  out.reserve(static_cast<std::size_t>(modes.cols()) + 1);
  out.push_back(velocity_image(mesh, chi));
  for (Eigen::Index j = 0; j < modes.cols(); ++j) out.push_back(velocity_image(mesh, modes.column(j)));
  return out;
}

std::vector<PressureImage> pressure_images(const Mesh& mesh, const SnapshotMatrix& modes,
                                           const std::vector<bool>& fixed) {
  std::vector<PressureImage> out;
  for (Eigen::Index j = 0; j < modes.cols(); ++j) out.push_back(pressure_image(mesh, modes.column(j), fixed));
  return out;
}

/// (test_i, img_j) over cells for integrals stored per cell.
template <class Get>
Eigen::MatrixXd gram(int rows, int cols, Get get) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = get(i, j);
  return m;
}

void check_space(const Mesh& mesh, const SnapshotMatrix* s, int ncomp, const char* what) {
  if (!s) throw ConfigError(std::string("assemble: missing ") + what);
  s->check_mesh(mesh);
  if (s->ncomp != ncomp) throw ConfigError(std::string("assemble: ") + what + " has the wrong number of components");
}

}  // namespace

Eigen::VectorXd project_coefficients(const SnapshotMatrix& space, const Eigen::VectorXd& w,
                                     const Eigen::VectorXd& flat) {
  if (space.cols() == 0) return Eigen::VectorXd();
  const Eigen::MatrixXd WZ = w.asDiagonal() * space.data;
  const Eigen::MatrixXd G = space.data.transpose() * WZ;
  return G.ldlt().solve(WZ.transpose() * flat);
}

ReducedOperators assemble(const Mesh& mesh, const RomSpaces& sp, const AssemblyOptions& opt,
                          const FomState* initial) {
  check_space(mesh, sp.evolve_velocity, 2, "evolve velocity space");
  check_space(mesh, sp.evolve_pressure, 1, "evolve pressure space");
  check_space(mesh, sp.filter_velocity, 2, "filter velocity space");
  check_space(mesh, sp.filter_pressure, 1, "filter pressure space");
  if (!sp.lifting || sp.lifting->c.rows() != mesh.n_cells()) throw ConfigError("assemble: missing lifting function");
  opt.physics.validate();

  std::vector<bool> fixed(mesh.patches().size(), false);
  for (const auto& name : opt.fixed_pressure_patches) {
    const int p = mesh.patch_index(name);
    if (p >= 0) fixed[static_cast<std::size_t>(p)] = true;
  }

  const Eigen::VectorXd& V = mesh.cell_areas();
  const int ni = mesh.n_internal_faces(), nb = mesh.n_faces() - ni;
  const int nv = static_cast<int>(sp.evolve_velocity->cols());
  const int nq = static_cast<int>(sp.evolve_pressure->cols());
  const int nu = static_cast<int>(sp.filter_velocity->cols());
  const int nqb = static_cast<int>(sp.filter_pressure->cols());

  const auto va = augmented_images(mesh, *sp.lifting, *sp.evolve_velocity);
  const auto ua = augmented_images(mesh, *sp.lifting, *sp.filter_velocity);
  const auto qe = pressure_images(mesh, *sp.evolve_pressure, fixed);
  const auto qf = pressure_images(mesh, *sp.filter_pressure, fixed);
  // test modes are the trial columns after the lifting
  auto vt = [&](int i) -> const Eigen::MatrixXd& { return va[static_cast<std::size_t>(i) + 1].f.c; };
  auto ut = [&](int i) -> const Eigen::MatrixXd& { return ua[static_cast<std::size_t>(i) + 1].f.c; };

  ReducedOperators ops;
  auto& M = ops.matrices;
  M["M"] = gram(nv, nv + 1, [&](int i, int j) { return cell_dot_w(vt(i), va[j].f.c, V); });
  M["Mt"] = gram(nv, nu + 1, [&](int i, int j) { return cell_dot_w(vt(i), ua[j].f.c, V); });
  M["A"] = gram(nv, nv + 1, [&](int i, int j) { return cell_dot(vt(i), va[j].lap); });
  M["B"] = gram(nv, nq, [&](int i, int j) { return cell_dot_w(vt(i), qe[j].grad, V); });
  M["P"] = gram(nq, nv + 1, [&](int i, int j) { return cell_dot(qe[i].f.c, va[j].div); });

  M["Mbar"] = gram(nu, nu + 1, [&](int i, int j) { return cell_dot_w(ut(i), ua[j].f.c, V); });
  M["MtT"] = gram(nu, nv + 1, [&](int i, int j) { return cell_dot_w(ut(i), va[j].f.c, V); });
  M["Abar"] = gram(nu, nu + 1, [&](int i, int j) { return cell_dot(ut(i), ua[j].lap); });
  M["Bbar"] = gram(nu, nqb, [&](int i, int j) { return cell_dot_w(ut(i), qf[j].grad, V); });
  M["Pbar"] = gram(nqb, nu + 1, [&](int i, int j) { return cell_dot(qf[i].f.c, ua[j].div); });

  const bool ppe = opt.mode == StabMode::Ppe;
  Tensor3 G(nv, nv + 1, nu + 1);
  Tensor3 J = ppe ? Tensor3(nq, nv + 1, nu + 1) : Tensor3();
  for (int k = 0; k <= nu; ++k) {
    for (int j = 0; j <= nv; ++j) {
      const Eigen::MatrixXd conv = apply_convection(mesh, ua[k].flux, va[j].f);
      for (int i = 0; i < nv; ++i) G(i, j, k) = cell_dot(vt(i), conv);
      if (ppe) {
        for (int i = 0; i < nq; ++i) J(i, j, k) = cell_dot(qe[i].grad, conv);
      }
    }
  }
  ops.tensors["G"] = std::move(G);

  if (ppe) {
    ops.tensors["J"] = std::move(J);
    auto bsum = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); };
    Eigen::VectorXd mag(nb);
    for (int i = 0; i < nb; ++i) mag[i] = mesh.face_mag(ni + i);
    M["D"] = gram(nq, nq, [&](int i, int j) { return cell_dot_w(qe[i].grad, qe[j].grad, V); });
    M["Dbar"] = gram(nqb, nqb, [&](int i, int j) { return cell_dot_w(qf[i].grad, qf[j].grad, V); });
    M["N"] = gram(nq, nv + 1, [&](int i, int j) {
      return bsum(qe[i].tang_b.cwiseProduct(mag), va[j].curl_b);
    });
    M["Nbar"] = gram(nqb, nu + 1, [&](int i, int j) {
      return bsum(qf[i].tang_b.cwiseProduct(mag), ua[j].curl_b);
    });
    M["F"] = gram(nq, nv + 1, [&](int i, int j) { return bsum(qe[i].f.b.col(0), va[j].flux.tail(nb)); });
    M["Fbar"] = gram(nq, nu + 1, [&](int i, int j) { return bsum(qe[i].f.b.col(0), ua[j].flux.tail(nb)); });
  }

  Eigen::MatrixXd aero_u(4, nu + 1), aero_q(4, nq);
  const Field zero_q = Field::zeros(mesh, 1), zero_u = Field::zeros(mesh, 2);
  for (int j = 0; j <= nu; ++j) aero_u.col(j) = aero_coefficients(mesh, ua[j].f, zero_q, opt.aero).as_vector();
  for (int j = 0; j < nq; ++j) aero_q.col(j) = aero_coefficients(mesh, zero_u, qe[j].f, opt.aero).as_vector();
  M["aero_u"] = aero_u;
  M["aero_q"] = aero_q;

  const auto law = inlet_law(opt.inlet_law);
  const double g0 = law(opt.physics.t0);
  Eigen::VectorXd b0 = Eigen::VectorXd::Zero(nv), g0v = Eigen::VectorXd::Zero(nq);
  Eigen::VectorXd bb0 = Eigen::VectorXd::Zero(nu), gb0 = Eigen::VectorXd::Zero(nqb);
  if (initial) {
    const Eigen::VectorXd w2 = snapshot_weights(mesh, 2), w1 = snapshot_weights(mesh, 1);
    const Eigen::VectorXd chi = flatten(*sp.lifting);
    b0 = project_coefficients(*sp.evolve_velocity, w2, flatten(initial->v) - g0 * chi);
    bb0 = project_coefficients(*sp.filter_velocity, w2, flatten(initial->u) - g0 * chi);
    g0v = project_coefficients(*sp.evolve_pressure, w1, flatten(initial->q));
    gb0 = project_coefficients(*sp.filter_pressure, w1, flatten(initial->qbar));
  }
  M["beta0"] = b0;
  M["gamma0"] = g0v;
  M["betabar0"] = bb0;
  M["gammabar0"] = gb0;

  nlohmann::ordered_json meta;
  meta["format"] = "romef-operators";
  meta["mode"] = to_string(opt.mode);
  meta["dims"] = {{"nv", nv}, {"nq", nq}, {"nu", nu}, {"nqbar", nqb}};
  meta["physics"] = {{"rho", opt.physics.rho}, {"mu", opt.physics.mu},       {"alpha", opt.physics.alpha},
                     {"dt", opt.physics.dt},   {"t0", opt.physics.t0},       {"T", opt.physics.T},
                     {"mu_bar", opt.physics.mu_bar()}};
  meta["inlet_law"] = opt.inlet_law;
  meta["mesh_fingerprint"] = mesh.fingerprint();
  meta["mesh_cells"] = mesh.n_cells();
  ops.meta = meta.dump();
  return ops;
}

RomDims rom_dims(const ReducedOperators& ops) {
  const auto meta = nlohmann::json::parse(ops.meta);
  const auto& d = meta.at("dims");
  return {d.at("nv").get<int>(), d.at("nq").get<int>(), d.at("nu").get<int>(), d.at("nqbar").get<int>()};
}

}  // namespace romef
