#include "romef/snapshots.hpp"

#include <fstream>

#include "romef/binary_io.hpp"
#include "romef/errors.hpp"

namespace romef {

namespace {

constexpr char kMagic[] = "ROMEFSNP";
constexpr std::uint32_t kVersion = 1;

}  // namespace

SnapshotMatrix SnapshotMatrix::empty(const std::string& name, const Mesh& mesh, int ncomp) {
  SnapshotMatrix s;
  s.name = name;
  s.ncomp = ncomp;
  s.n_cells = mesh.n_cells();
  s.n_bfaces = mesh.n_faces() - mesh.n_internal_faces();
  s.fingerprint = mesh.fingerprint();
  s.data.resize(static_cast<Eigen::Index>(ncomp) * (s.n_cells + s.n_bfaces), 0);
  return s;
}

Field SnapshotMatrix::column(Eigen::Index j) const { return unflatten(data.col(j), ncomp, n_cells, n_bfaces); }

void SnapshotMatrix::append(const Field& f, double t) {
  if (f.ncomp() != ncomp || f.c.rows() != n_cells || f.b.rows() != n_bfaces) {
    throw std::invalid_argument("snapshot " + name + ": field layout mismatch");
  }
  data.conservativeResize(data.rows(), data.cols() + 1);
  data.col(data.cols() - 1) = flatten(f);
  times.push_back(t);
}

void SnapshotMatrix::check_mesh(const Mesh& mesh) const {
  if (fingerprint != mesh.fingerprint() || n_cells != mesh.n_cells() ||
      n_bfaces != mesh.n_faces() - mesh.n_internal_faces()) {
    throw FingerprintError("snapshot matrix '" + name + "' was built on a different mesh");
  }
}

Eigen::VectorXd snapshot_weights(const Mesh& mesh, int ncomp) {
  const Eigen::Index nc = mesh.n_cells(), nb = mesh.n_faces() - mesh.n_internal_faces();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(ncomp * (nc + nb));
  for (int j = 0; j < ncomp; ++j) w.segment(j * nc, nc) = mesh.cell_areas();
  return w;
}

double weighted_dot(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  return (w.array() * a.array() * b.array()).sum();
}

void write_snapshots(const SnapshotMatrix& s, std::ostream& os) {
  if (static_cast<Eigen::Index>(s.times.size()) != s.cols()) {
    throw std::invalid_argument("snapshot " + s.name + ": times do not match columns");
  }
  BinaryWriter w(os);
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.str(s.name);
  w.u32(static_cast<std::uint32_t>(s.ncomp));
  w.u64(static_cast<std::uint64_t>(s.n_cells));
  w.u64(static_cast<std::uint64_t>(s.n_bfaces));
  w.u64(static_cast<std::uint64_t>(s.rows()));
  w.u64(static_cast<std::uint64_t>(s.cols()));
  w.u64(s.fingerprint);
  w.f64_array(s.data.data(), static_cast<std::size_t>(s.data.size()));
  w.f64_array(s.times.data(), s.times.size());
}

SnapshotMatrix read_snapshots(std::istream& is, const std::string& what) {
  BinaryReader r(is, what);
  r.expect_magic(std::string(kMagic, 8));
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  SnapshotMatrix s;
  s.name = r.str(4096);
  s.ncomp = static_cast<int>(r.u32());
  const std::uint64_t nc = r.u64(), nb = r.u64(), nh = r.u64(), ns = r.u64();
  s.fingerprint = r.u64();
  if (s.ncomp < 1 || s.ncomp > 2 || nh != static_cast<std::uint64_t>(s.ncomp) * (nc + nb)) {
    r.fail("inconsistent header");
  }
  if (nh > (1ull << 31) || ns > (1ull << 24)) r.fail("header sizes out of range");
  s.n_cells = static_cast<int>(nc);
  s.n_bfaces = static_cast<int>(nb);
  s.data.resize(static_cast<Eigen::Index>(nh), static_cast<Eigen::Index>(ns));
  r.f64_array(s.data.data(), static_cast<std::size_t>(s.data.size()));
  s.times.resize(ns);
  r.f64_array(s.times.data(), s.times.size());
  return s;
}

void save_snapshots(const SnapshotMatrix& s, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshots(s, os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

SnapshotMatrix load_snapshots(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_snapshots(is, path.string());
}

Lifting compute_lifting(const Mesh& mesh, double channel_height, std::function<double(double)> law, double tol,
                        int max_iter, double alpha) {
  PhysicsConfig ph;
  ph.rho = 1.0;
  ph.dt = 1.0;
  ph.alpha = alpha;
  ph.t0 = 0.0;
  ph.T = 1.0;
  SolverControls ctl;
  ctl.simplec_tol = tol;
  ctl.simplec_max_iter = max_iter;
  EvolveFilterSolver solver(mesh, ph, ctl, channel_flow_boundary(mesh, [](double) { return 1.0; }, channel_height));
  Eigen::VectorXd flux;
  StepReport rep;
  auto [chi, p] = solver.filter_step(Field::zeros(mesh, 2), 1.0, &flux, &rep);
  if (rep.simplec_residual > tol) {
    throw NumericalError("lifting solve did not converge (residual " + std::to_string(rep.simplec_residual) + ")");
  }
  Lifting l;
  l.chi = std::move(chi);
  l.law = std::move(law);
  l.fingerprint = mesh.fingerprint();
  l.max_divergence = rep.continuity_u;
  return l;
}

Field homogenize(const Mesh& mesh, const Field& v, const Lifting& lifting, double t) {
  if (lifting.fingerprint != mesh.fingerprint()) throw FingerprintError("lifting was built on a different mesh");
  Field out = v;
  const double g = lifting.coefficient(t);
  out.c -= g * lifting.chi.c;
  out.b -= g * lifting.chi.b;
  return out;
}

Field dehomogenize(const Mesh& mesh, const Field& v, const Lifting& lifting, double t) {
  if (lifting.fingerprint != mesh.fingerprint()) throw FingerprintError("lifting was built on a different mesh");
  Field out = v;
  const double g = lifting.coefficient(t);
  out.c += g * lifting.chi.c;
  out.b += g * lifting.chi.b;
  return out;
}

void homogenize_columns(SnapshotMatrix& s, const Lifting& lifting, int sign) {
  if (s.fingerprint != lifting.fingerprint) throw FingerprintError("lifting was built on a different mesh");
  const Eigen::VectorXd chi = flatten(lifting.chi);
  if (chi.size() != s.rows()) throw FingerprintError("lifting layout does not match snapshot " + s.name);
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    s.data.col(j) -= static_cast<double>(sign) * lifting.coefficient(s.times[static_cast<std::size_t>(j)]) * chi;
  }
}

}  // namespace romef
