#pragma once

#include "romef/fom.hpp"

namespace romef::testing {

struct PoiseuilleResult {
  double centerline = 0.0;  // max streamwise velocity in the column nearest x = 1.5
  double expected = 0.0;    // 1.5 * mean inlet velocity
  double dpdx = 0.0;
  double dpdx_expected = 0.0;  // -12 mu U / H^2
  double continuity = 0.0;     // of the evolve step, last step
  double max_change = 0.0;     // max |u^n - u^{n-1}| at the last step
};

/// Empty 2.2 x 0.41 channel with a constant parabolic inlet of mean
/// `u_mean`, run to t_end on an nx x ny uniform mesh.
PoiseuilleResult run_poiseuille(int nx = 88, int ny = 16, double u_mean = 0.2, double dt = 0.01,
                                double t_end = 20.0);

struct TaylorGreenResult {
  double ev = 0.0;  // relative L2 velocity error of v at T
  double eu = 0.0;  // same for u
};

/// Decaying Taylor-Green vortex on the unit square (nu = 0.01) with exact
/// Dirichlet velocity, pressure pinned on the left side and exact initial
/// data.
TaylorGreenResult run_taylor_green(int n, double dt, double T = 0.4, double alpha = 0.0);

}  // namespace romef::testing
