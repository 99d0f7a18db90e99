#include "romef/supremizer.hpp"

#include <Eigen/Eigenvalues>

#include "romef/errors.hpp"

namespace romef {

SupremizerSolver::SupremizerSolver(const Mesh& mesh, double tol, int max_nonorth_iter)
    : mesh_(mesh), tol_(tol), max_iter_(max_nonorth_iter) {
  BoundarySet bcs(mesh, 1);
  for (const auto& p : mesh.patches()) bcs.set(mesh, p.name, PatchBc::homogeneous(1));
  A_ = laplacian(mesh, 1.0, bcs, 0.0).A;
  neg_lap_.compute(-A_);
  unit_gamma_ = Eigen::VectorXd::Ones(mesh.n_faces());
}

Field SupremizerSolver::solve(const Field& q) const {
  if (q.ncomp() != 1 || q.c.rows() != mesh_.n_cells()) throw std::invalid_argument("supremizer: scalar field expected");
  const Eigen::VectorXd& V = mesh_.cell_areas();
  Eigen::MatrixXd rhs = gauss_gradient(mesh_, q);
  for (int j = 0; j < 2; ++j) rhs.col(j) = -rhs.col(j).cwiseProduct(V);

  Field s = Field::zeros(mesh_, 2);
  const double rn = rhs.norm();
  if (rn == 0.0) {
    last_residual_ = 0.0;
    return s;
  }
  double res = 0.0;
  for (int it = 0; it < max_iter_; ++it) {
    const Eigen::MatrixXd corr = laplacian_correction(mesh_, unit_gamma_, gauss_gradient(mesh_, s));
    const Eigen::MatrixXd prev = s.c;
    for (int j = 0; j < 2; ++j) s.c.col(j) = neg_lap_.solve(corr.col(j) - rhs.col(j));
    const Eigen::MatrixXd r = apply_laplacian(mesh_, 1.0, s) - rhs;
    res = r.norm() / rn;
    if (res <= tol_ || (s.c - prev).norm() <= 1e-15 * s.c.norm()) break;
  }
  last_residual_ = res;
  if (res > tol_) {
    throw SolverError("supremizer Poisson solve stalled at residual " + std::to_string(res), {res});
  }
  return s;
}

SnapshotMatrix SupremizerSolver::solve_all(const SnapshotMatrix& pressure, const std::string& name) const {
  pressure.check_mesh(mesh_);
  SnapshotMatrix out = SnapshotMatrix::empty(name, mesh_, 2);
  out.data.resize(out.data.rows(), pressure.cols());
  for (Eigen::Index j = 0; j < pressure.cols(); ++j) out.data.col(j) = flatten(solve(pressure.column(j)));
  out.times = pressure.times;
  return out;
}

EnrichedSpace enrich(const std::vector<std::pair<std::string, const SnapshotMatrix*>>& blocks,
                     const Eigen::VectorXd& w, double min_eig) {
  EnrichedSpace e;
  Eigen::Index total = 0;
  const SnapshotMatrix* first = nullptr;
  for (const auto& [name, m] : blocks) {
    if (!m) continue;
    if (first && (m->rows() != first->rows() || m->fingerprint != first->fingerprint)) {
      throw FingerprintError("enrich: block '" + name + "' lives on a different mesh or layout");
    }
    if (!first) first = m;
    total += m->cols();
  }
  if (!first) throw ConfigError("enrich: no blocks given");
  e.columns = *first;
  e.columns.name = "enriched";
  e.columns.data.resize(first->rows(), total);
  e.columns.times.clear();
  Eigen::Index at = 0;
  for (const auto& [name, m] : blocks) {
    if (!m || m->cols() == 0) continue;
    e.columns.data.middleCols(at, m->cols()) = m->data;
    for (Eigen::Index j = 0; j < m->cols(); ++j) e.columns.times.push_back(static_cast<double>(at + j + 1));
    e.blocks.emplace_back(name, static_cast<int>(m->cols()));
    at += m->cols();
  }
  if (total == 0) return e;
  const Eigen::MatrixXd& Z = e.columns.data;
  const Eigen::MatrixXd G = Z.transpose() * (w.asDiagonal() * Z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  e.gram_min_eigenvalue = es.eigenvalues()[0];
  e.gram_condition = es.eigenvalues()[total - 1] / std::max(e.gram_min_eigenvalue, 1e-300);
  if (!(e.gram_min_eigenvalue > min_eig)) {
    throw ConfigError("enriched velocity space is (nearly) linearly dependent: smallest Gram eigenvalue " +
                      std::to_string(e.gram_min_eigenvalue) + "; request fewer supremizer modes");
  }
  return e;
}

}  // namespace romef
