#pragma once

#include <memory>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "romef/fv.hpp"

namespace romef {

struct SolveStats {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

/// Jacobi-preconditioned BiCGSTAB for the non-symmetric momentum systems.
/// Residuals are relative to ||b||. Throws SolverError when `maxit` is hit
/// above `tol`.
SolveStats solve_bicgstab(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int maxit,
                          const std::string& what);

/// Symmetric positive-definite solver that keeps a sparse LDLT factorisation
/// of some earlier matrix and uses it to precondition CG on the current one.
/// A matrix that drifts slowly (pressure equations whose face coefficients
/// change a little every step) is then solved in a handful of iterations.
/// The factorisation is refreshed when CG needs more than `refresh_after`
/// iterations or the sparsity pattern changes.
class FrozenFactorCg {
 public:
  explicit FrozenFactorCg(int refresh_after = 12) : refresh_after_(refresh_after) {}

  SolveStats solve(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int maxit,
                   const std::string& what);
  int refactorizations() const { return refactorizations_; }

 private:
  void factorize(const SpMat& A);

  int refresh_after_;
  int refactorizations_ = 0;
  bool stale_ = false;
  Eigen::Index nnz_ = -1;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

/// Direct solver for a fixed SPD matrix.
class DirectSpd {
 public:
  DirectSpd() = default;
  explicit DirectSpd(const SpMat& A) { compute(A); }
  void compute(const SpMat& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  bool ready() const { return static_cast<bool>(ldlt_); }

 private:
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

}  // namespace romef
