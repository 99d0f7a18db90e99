#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "romef/snapshots.hpp"

namespace romef {

/// Method-of-snapshots POD of one field.
struct PodBasis {
  std::string field;
  SnapshotMatrix modes;         // columns are L2-orthonormal modes, times = 1..r
  Eigen::VectorXd eigenvalues;  // all of them, descending, negatives clipped to 0
  Eigen::MatrixXd Q;            // unit eigenvectors of C in the same order
  Eigen::VectorXd cumulative;   // partial sums of eigenvalues / total
  int rank = 0;                 // eigenvalues above 1e-12 lambda_1

  int size() const { return static_cast<int>(modes.cols()); }
};

/// C_ij = (s_i, s_j) in the weighted inner product. Throws ConfigError on
/// an empty set.
Eigen::MatrixXd correlation_matrix(const SnapshotMatrix& s, const Eigen::VectorXd& w);

/// Either a fixed number of modes or the smallest count reaching a
/// cumulative energy fraction.
struct PodRequest {
  std::optional<int> count;
  std::optional<double> energy;

  static PodRequest modes(int n) { return {n, std::nullopt}; }
  static PodRequest energy_fraction(double e) { return {std::nullopt, e}; }
};

/// Smallest k with cumulative(k) >= target, target in (0, 1].
int modes_for_energy(const Eigen::VectorXd& cumulative, double target);

/// Modes zeta_i = S Q_i / sqrt(lambda_i), renormalised and re-orthogonalised
/// in the weighted inner product, with the first significant weighted entry
/// of each mode made positive. Throws ConfigError for an invalid request or
/// more modes than the numerical rank.
PodBasis compute_basis(const Eigen::MatrixXd& C, const SnapshotMatrix& s, const Eigen::VectorXd& w,
                       const PodRequest& request);

/// Coefficients of every snapshot column on the basis, r x N_s.
Eigen::MatrixXd project(const PodBasis& basis, const Eigen::VectorXd& w, const Eigen::MatrixXd& data);

/// Squared weighted Frobenius norm of S - Z Z^T W S using the first k modes.
double reconstruction_error_sq(const PodBasis& basis, const Eigen::VectorXd& w, const SnapshotMatrix& s, int k);

/// Modes in the snapshot format plus a CSV of index, eigenvalue and
/// cumulative energy. Q is not persisted.
void save_basis(const PodBasis& b, const std::filesystem::path& modes_path, const std::filesystem::path& eig_path);
PodBasis load_basis(const std::filesystem::path& modes_path, const std::filesystem::path& eig_path);

}  // namespace romef
