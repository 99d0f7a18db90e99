#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "romef/field.hpp"
#include "romef/fv.hpp"
#include "romef/linsolve.hpp"
#include "romef/mesh.hpp"

namespace romef {

struct PhysicsConfig {
  double rho = 1.0;
  double mu = 1e-3;
  double alpha = 0.0032;
  double dt = 4e-4;
  double t0 = 0.0;
  double T = 8.0;

  /// Filter viscosity rho alpha^2 / dt.
  double mu_bar() const { return rho * alpha * alpha / dt; }
  int n_steps() const;
  void validate() const;  // throws ConfigError
};

struct SolverControls {
  int piso_correctors = 2;
  int nonorth_correctors = 1;
  double simplec_tol = 1e-7;
  int simplec_max_iter = 50;
  double p_tol = 1e-8;
  double u_tol = 1e-7;
  int max_linear_iter = 2000;
};

/// Velocity and pressure boundary conditions of a flow problem. q-bar uses
/// `filter_pressure` when it is set, otherwise the conditions of q.
struct FlowBoundary {
  BoundarySet velocity;
  BoundarySet pressure;
  BoundarySet filter_pressure;
};

/// Time law of the benchmark inlet, sin(pi t / 8).
double benchmark_inlet_law(double t);

/// Parabolic inlet profile with unit mean, 6 y (H - y) / H^2.
double parabolic_profile(double y, double height);

/// Channel conditions: `inlet` carries law(t) * parabolic profile, `outlet`
/// is zero-gradient velocity with q = 0, every other patch is no-slip with
/// zero-gradient pressure.
FlowBoundary channel_flow_boundary(const Mesh& mesh, std::function<double(double)> law, double height,
                                   double y0 = 0.0);

struct FomState {
  Field v, q, u, qbar;
  Field u_old;  // u at the previous time level
  Eigen::VectorXd phi_u;  // conservative face flux of u from the filter
  double t = 0.0;
  int step = 0;
};

struct StepReport {
  double t = 0.0;
  double continuity_v = 0.0;  // max |sum_f phi| / max |phi| after PISO
  double continuity_u = 0.0;  // same after the filter
  int simplec_iterations = 0;
  double simplec_residual = 0.0;
};

/// Evolve-filter time stepper: BDF2 momentum with extrapolated convecting
/// velocity and PISO coupling, then the generalised-Stokes filter solved by
/// SIMPLEC. The first step uses backward Euler.
class EvolveFilterSolver {
 public:
  EvolveFilterSolver(const Mesh& mesh, PhysicsConfig physics, SolverControls controls, FlowBoundary bc);

  const FomState& state() const { return state_; }
  /// Replaces the state; boundary rows are refreshed from the conditions.
  void set_state(FomState s);

  StepReport step();

  /// Evolve on the current history for time t_next. Returns v, q and fills
  /// the continuity residual.
  std::pair<Field, Field> evolve_step(double t_next, double* continuity = nullptr);

  /// Filter v at time t_next. Fills the conservative flux of the result and
  /// the iteration count.
  std::pair<Field, Field> filter_step(const Field& v, double t_next, Eigen::VectorXd* flux = nullptr,
                                      StepReport* report = nullptr);

  const Mesh& mesh() const { return mesh_; }
  const PhysicsConfig& physics() const { return physics_; }
  const FlowBoundary& boundary() const { return bc_; }

 private:
  class Pattern;

  /// Solves  div(gamma grad p) = div_rhs  with the explicit non-orthogonal
  /// loop; returns the face flux of gamma grad p consistent with the last
  /// solve. Uses `direct` when given, the frozen-factor CG otherwise.
  Eigen::VectorXd solve_pressure(const Eigen::VectorXd& gamma_f, const SpMat& M, const Eigen::VectorXd& bsrc,
                                 const Eigen::VectorXd& div_rhs, Field& p, double t, const DirectSpd* direct,
                                 const BoundarySet& bcs);
  void setup_filter();
  /// M = -(orthogonal Laplacian with gamma_f) and its boundary source for p.
  void pressure_matrix(const Eigen::VectorXd& gamma_f, double t, const BoundarySet& bcs, SpMat& M,
                       Eigen::VectorXd& bsrc) const;

  const Mesh& mesh_;
  PhysicsConfig physics_;
  SolverControls ctl_;
  FlowBoundary bc_;
  FomState state_;

  // filter step matrices are constant for a fixed mesh and physics
  SpMat filter_A_;
  Eigen::VectorXd filter_rAU_, filter_rAtU_, filter_gamma_f_, filter_gamma_diff_f_;
  DirectSpd filter_mom_;
  DirectSpd filter_p_;
  SpMat filter_p_M_;
  std::shared_ptr<const Pattern> pattern_;

  FrozenFactorCg evolve_p_cg_;
};

/// Maximum over cells of |sum_f phi_f| divided by max_f |phi_f|.
double continuity_residual(const Mesh& mesh, const Eigen::VectorXd& flux);

}  // namespace romef
