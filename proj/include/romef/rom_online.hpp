#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "romef/rom_assembly.hpp"
#include "romef/rom_ops.hpp"

namespace romef {

struct RomState {
  Eigen::VectorXd beta, gamma, beta_bar, gamma_bar;
  Eigen::VectorXd beta_bar_old;  // filter coefficients one level back
  double t = 0.0;
  double t0 = 0.0;
  int step = 0;
};

struct RomStepInfo {
  double rcond_evolve = 0.0;  // reciprocal condition estimates of the dense systems
  double rcond_filter = 0.0;
  double residual = 0.0;      // max relative residual of the two solves
  bool singular = false;
};

/// Monolithic dense reduced evolve-filter stepper. Each step solves the
/// momentum system coupled with either reduced continuity (NOS, SUP1, SUP2)
/// or the reduced pressure Poisson equation (PPE), then the filter system in
/// the same way. NOS uses a full-pivoting LU so a singular saddle point
/// still yields numbers; the other modes use partial pivoting.
///
/// The operators are referenced, not copied, and step() reuses internal
/// work arrays: one solver must not be stepped from several threads.
class RomSolver {
 public:
  RomSolver(const ReducedOperators& ops, StabMode mode);
  /// Explicit physics and law, used for synthetic operators.
  RomSolver(const ReducedOperators& ops, StabMode mode, double rho, double mu, double mu_bar, double dt,
            std::function<double(double)> law);

  /// State from the stored initial coefficients at t0.
  RomState initial_state(double t0) const;
  RomStepInfo step(RomState& s) const;

  const RomDims& dims() const { return dims_; }
  /// (cd, cl, cd_tn, cl_tn) of the state.
  Eigen::Vector4d aero(const RomState& s) const;
  double law(double t) const { return law_(t); }
  double dt() const { return dt_; }

 private:
  void setup();

  const ReducedOperators& ops_;
  StabMode mode_;
  RomDims dims_;
  double rho_ = 1.0, mu_ = 1e-3, mu_bar_ = 0.0, dt_ = 1.0;
  std::function<double(double)> law_;
  bool ppe_ = false;

  const Eigen::MatrixXd *Mt_ = nullptr, *B_ = nullptr, *P_ = nullptr, *D_ = nullptr, *Fbar_ = nullptr;
  const Eigen::MatrixXd *MtT_ = nullptr, *Pbar_ = nullptr, *Nbar_ = nullptr;
  const Eigen::MatrixXd *aero_u_ = nullptr, *aero_q_ = nullptr;
  const Tensor3 *G_ = nullptr, *J_ = nullptr;
  // time-independent parts of the evolve blocks, first step (BDF1) and later
  Eigen::MatrixXd K1_, K2_, Kp1_, Kp2_;
  Eigen::VectorXd kb0_;

  Eigen::MatrixXd filter_lhs_;
  Eigen::FullPivLU<Eigen::MatrixXd> filter_full_;
  Eigen::PartialPivLU<Eigen::MatrixXd> filter_partial_;
  double filter_rcond_ = 0.0;

  struct Work {
    Eigen::MatrixXd K, Kp, L;
    Eigen::VectorXd r, x, rf, y, un, unm1, ustar, hist, ug;
    Eigen::FullPivLU<Eigen::MatrixXd> full;
    Eigen::PartialPivLU<Eigen::MatrixXd> partial;
  };
  mutable Work w_;
};

struct RomTrajectory {
  std::vector<double> t;  // t0 and every step
  Eigen::MatrixXd beta, gamma, beta_bar, gamma_bar;  // one column per entry of t
  std::vector<double> rcond_evolve, rcond_filter;
  std::vector<Eigen::Vector4d> aero;
  double max_residual = 0.0;
  int singular_steps = 0;
  /// First step whose coefficients became non-finite, -1 if none. Later
  /// entries are NaN.
  int blow_up_step = -1;
  double online_seconds = 0.0;  // time-stepping loop only, best of the repeats
};

/// Runs n_steps from the stored initial coefficients. The loop is timed
/// `timing_repeats` times (identical results) and the fastest is kept.
RomTrajectory run_rom(const RomSolver& solver, double t0, int n_steps, int timing_repeats = 1);

}  // namespace romef
