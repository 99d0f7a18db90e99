#pragma once

#include <string>
#include <utility>
#include <vector>

#include "romef/field.hpp"
#include "romef/fv.hpp"
#include "romef/linsolve.hpp"
#include "romef/mesh.hpp"
#include "romef/snapshots.hpp"

namespace romef {

/// Solves  Delta s = -grad q  component-wise with s = 0 on the whole
/// boundary, using the FV Laplacian (orthogonal part factorised once, the
/// non-orthogonal part iterated to convergence).
class SupremizerSolver {
 public:
  explicit SupremizerSolver(const Mesh& mesh, double tol = 1e-10, int max_nonorth_iter = 100);

  Field solve(const Field& q) const;
  /// One supremizer column per pressure column, same time stamps.
  SnapshotMatrix solve_all(const SnapshotMatrix& pressure, const std::string& name) const;

  /// Relative residual || L s + grad q || / || grad q || of the last solve.
  double last_residual() const { return last_residual_; }

 private:
  const Mesh& mesh_;
  double tol_;
  int max_iter_;
  SpMat A_;
  DirectSpd neg_lap_;
  Eigen::VectorXd unit_gamma_;
  mutable double last_residual_ = 0.0;
};

enum class SupVariant { Sup1, Sup2 };

/// Velocity space made of consecutive blocks of modes, not re-orthogonalised.
struct EnrichedSpace {
  SnapshotMatrix columns;
  std::vector<std::pair<std::string, int>> blocks;
  double gram_min_eigenvalue = 0.0;
  double gram_condition = 0.0;

  int size() const { return static_cast<int>(columns.cols()); }
};

/// Concatenates the blocks in order and checks linear independence through
/// the Gram matrix; throws ConfigError when its smallest eigenvalue is at or
/// below `min_eig`. Blocks with zero columns are skipped.
EnrichedSpace enrich(const std::vector<std::pair<std::string, const SnapshotMatrix*>>& blocks,
                     const Eigen::VectorXd& w, double min_eig = 1e-10);

}  // namespace romef
