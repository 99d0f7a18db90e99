#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romef/field.hpp"
#include "romef/fom.hpp"
#include "romef/mesh.hpp"

namespace romef {

/// Columns of flattened fields (see flatten()) with their time stamps.
/// Rows cover cells and boundary faces so that every column is a complete
/// field; boundary rows carry zero weight in inner products.
struct SnapshotMatrix {
  std::string name;
  int ncomp = 1;
  int n_cells = 0;
  int n_bfaces = 0;
  std::uint64_t fingerprint = 0;
  Eigen::MatrixXd data;
  std::vector<double> times;

  static SnapshotMatrix empty(const std::string& name, const Mesh& mesh, int ncomp);

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
  Field column(Eigen::Index j) const;
  void append(const Field& f, double t);
  /// Throws FingerprintError when the matrix was built on another mesh.
  void check_mesh(const Mesh& mesh) const;
};

/// Diagonal of the L2 weight for flattened fields: cell areas repeated per
/// component, zero on boundary rows.
Eigen::VectorXd snapshot_weights(const Mesh& mesh, int ncomp);

/// Weighted inner product of two flattened fields.
double weighted_dot(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

/// Binary format "ROMEFSNP" version 1, see docs/formats.md.
void save_snapshots(const SnapshotMatrix& s, const std::filesystem::path& path);
SnapshotMatrix load_snapshots(const std::filesystem::path& path);
void write_snapshots(const SnapshotMatrix& s, std::ostream& os);
SnapshotMatrix read_snapshots(std::istream& is, const std::string& what = "snapshot stream");

/// Divergence-free field chi carrying the inlet profile, with the time law
/// of its coefficient.
struct Lifting {
  Field chi;
  std::function<double(double)> law;
  std::uint64_t fingerprint = 0;
  double max_divergence = 0.0;  // of the conservative flux, per cell, normalised

  double coefficient(double t) const { return law(t); }
};

/// Solves the generalised Stokes problem  u - alpha^2 Delta u + grad p = 0,
/// div u = 0  with the channel conditions and a unit inlet law, using the
/// filter solver. The result is scaled by `law` in time. The default alpha
/// gives boundary layers of width ~0.03; much wider ones make SIMPLEC stall
/// on fine meshes.
Lifting compute_lifting(const Mesh& mesh, double channel_height, std::function<double(double)> law,
                        double tol = 1e-11, int max_iter = 5000, double alpha = 0.03);

/// v - law(t) chi. Throws FingerprintError on a mesh mismatch.
Field homogenize(const Mesh& mesh, const Field& v, const Lifting& lifting, double t);
Field dehomogenize(const Mesh& mesh, const Field& v, const Lifting& lifting, double t);

/// Homogenises every column of a velocity snapshot matrix in place.
void homogenize_columns(SnapshotMatrix& s, const Lifting& lifting, int sign = 1);

}  // namespace romef
