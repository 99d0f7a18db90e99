#include "romef/linsolve.hpp"

#include <cmath>

#include "romef/errors.hpp"

namespace romef {

SolveStats solve_bicgstab(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int maxit,
                          const std::string& what) {
  SolveStats st;
  const double bn = b.norm();
  if (bn == 0.0) {
    x.setZero();
    return st;
  }
  const Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  Eigen::VectorXd r = b - A * x;
  st.initial_residual = r.norm() / bn;
  st.final_residual = st.initial_residual;
  if (st.initial_residual <= tol) return st;

  std::vector<double> history{st.initial_residual};
  const Eigen::VectorXd r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size()), p = v, y, z, s, t;
  for (int it = 1; it <= maxit; ++it) {
    const double rho_new = r0.dot(r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta * (p - omega * v);
    y = dinv.cwiseProduct(p);
    v = A * y;
    alpha = rho / r0.dot(v);
    s = r - alpha * v;
    z = dinv.cwiseProduct(s);
    t = A * z;
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    x += alpha * y + omega * z;
    r = s - omega * t;
    st.iterations = it;
    st.final_residual = r.norm() / bn;
    history.push_back(st.final_residual);
    if (!std::isfinite(st.final_residual)) break;
    if (st.final_residual <= tol) return st;
    if (omega == 0.0) break;
  }
  throw SolverError(what + ": BiCGSTAB did not converge (residual " + std::to_string(st.final_residual) + ")",
                    history);
}

void FrozenFactorCg::factorize(const SpMat& A) {
  ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(A);
  if (ldlt_->info() != Eigen::Success) throw NumericalError("sparse LDLT factorisation failed");
  nnz_ = A.nonZeros();
  stale_ = false;
  ++refactorizations_;
}

SolveStats FrozenFactorCg::solve(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int maxit,
                                 const std::string& what) {
  if (!ldlt_ || A.nonZeros() != nnz_ || stale_) factorize(A);
  SolveStats st;
  const double bn = b.norm();
  if (bn == 0.0) {
    x.setZero();
    return st;
  }
  Eigen::VectorXd r = b - A * x;
  st.initial_residual = r.norm() / bn;
  st.final_residual = st.initial_residual;
  if (st.initial_residual <= tol) return st;
  std::vector<double> history{st.initial_residual};
  Eigen::VectorXd z = ldlt_->solve(r);
  Eigen::VectorXd p = z, q;
  double rz = r.dot(z);
  for (int it = 1; it <= maxit; ++it) {
    q = A * p;
    const double a = rz / p.dot(q);
    x += a * p;
    r -= a * q;
    st.iterations = it;
    st.final_residual = r.norm() / bn;
    history.push_back(st.final_residual);
    if (!std::isfinite(st.final_residual)) break;
    if (st.final_residual <= tol) {
      if (it > refresh_after_) stale_ = true;
      return st;
    }
    z = ldlt_->solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  stale_ = true;
  throw SolverError(what + ": CG did not converge (residual " + std::to_string(st.final_residual) + ")", history);
}

void DirectSpd::compute(const SpMat& A) {
  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(A);
  if (ldlt_->info() != Eigen::Success) throw NumericalError("sparse LDLT factorisation failed");
}

Eigen::VectorXd DirectSpd::solve(const Eigen::VectorXd& b) const {
  if (!ldlt_) throw std::logic_error("DirectSpd used before compute()");
  return ldlt_->solve(b);
}

}  // namespace romef
