#include "romef/fom.hpp"

#include <cmath>
#include <numbers>

#include "romef/errors.hpp"

namespace romef {

int PhysicsConfig::n_steps() const { return static_cast<int>(std::llround((T - t0) / dt)); }

void PhysicsConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("physics.rho must be positive");
  if (!(mu > 0.0)) throw ConfigError("physics.mu must be positive");
  if (!(dt > 0.0)) throw ConfigError("physics.dt must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("physics.alpha must be non-negative");
  if (!(T >= t0)) throw ConfigError("physics.T must not be before physics.t0");
  if (std::abs(n_steps() * dt - (T - t0)) > 1e-9 * std::max(1.0, std::abs(T))) {
    throw ConfigError("physics.dt must divide T - t0");
  }
}

double benchmark_inlet_law(double t) { return std::sin(std::numbers::pi * t / 8.0); }

double parabolic_profile(double y, double h) { return 6.0 * y * (h - y) / (h * h); }

FlowBoundary channel_flow_boundary(const Mesh& mesh, std::function<double(double)> law, double height, double y0) {
  FlowBoundary fb{BoundarySet(mesh, 2), BoundarySet(mesh, 1), BoundarySet()};
  for (const auto& p : mesh.patches()) {
    if (p.name == "inlet") {
      fb.velocity.set(mesh, p.name, PatchBc::fixed_value([law, height, y0](const Vec2& x, double t) {
        Eigen::RowVectorXd v(2);
        v << law(t) * parabolic_profile(x.y() - y0, height), 0.0;
        return v;
      }));
      fb.pressure.set(mesh, p.name, PatchBc::zero_gradient());
    } else if (p.name == "outlet") {
      fb.velocity.set(mesh, p.name, PatchBc::zero_gradient());
      fb.pressure.set(mesh, p.name, PatchBc::homogeneous(1));
    } else {
      fb.velocity.set(mesh, p.name, PatchBc::homogeneous(2));
      fb.pressure.set(mesh, p.name, PatchBc::zero_gradient());
    }
  }
  return fb;
}

double continuity_residual(const Mesh& mesh, const Eigen::VectorXd& flux) {
  const double fmax = flux.cwiseAbs().maxCoeff();
  if (fmax == 0.0) return 0.0;
  return surface_sum(mesh, flux).cwiseAbs().maxCoeff() / fmax;
}

/// Sparsity pattern of face-neighbour cell matrices with direct pointers
/// into the value array, so matrices are refilled without triplet sorting.
class EvolveFilterSolver::Pattern {
 public:
  explicit Pattern(const Mesh& m) {
    const int nc = m.n_cells(), ni = m.n_internal_faces();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nc + 2 * ni);
    for (int c = 0; c < nc; ++c) t.emplace_back(c, c, 1.0);
    for (int i = 0; i < ni; ++i) {
      t.emplace_back(m.owner(i), m.neighbour(i), 1.0);
      t.emplace_back(m.neighbour(i), m.owner(i), 1.0);
    }
    base.resize(nc, nc);
    base.setFromTriplets(t.begin(), t.end());
    base.makeCompressed();
    auto find = [&](int r, int c) {
      const auto* outer = base.outerIndexPtr();
      const auto* inner = base.innerIndexPtr();
      for (int k = outer[c]; k < outer[c + 1]; ++k) {
        if (inner[k] == r) return k;
      }
      throw std::logic_error("pattern entry missing");
    };
    diag.resize(nc);
    for (int c = 0; c < nc; ++c) diag[c] = find(c, c);
    pn.resize(ni);
    np.resize(ni);
    for (int i = 0; i < ni; ++i) {
      pn[i] = find(m.owner(i), m.neighbour(i));
      np[i] = find(m.neighbour(i), m.owner(i));
    }
    std::fill(base.valuePtr(), base.valuePtr() + base.nonZeros(), 0.0);
  }

  SpMat base;
  std::vector<int> diag, pn, np;
};

namespace {

/// A x minus its diagonal part, column-wise.
Eigen::MatrixXd offdiag_product(const SpMat& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = A * x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) -= d.cwiseProduct(x.col(j));
  return y;
}

void check_finite(const Field& f, const char* name, double t) {
  if (!f.all_finite()) throw BlowUpError(name, t);
}

Eigen::MatrixXd scale_rows(const Eigen::MatrixXd& m, const Eigen::VectorXd& s) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j).array() *= s.array();
  return out;
}

}  // namespace

EvolveFilterSolver::EvolveFilterSolver(const Mesh& mesh, PhysicsConfig physics, SolverControls controls,
                                       FlowBoundary bc)
    : mesh_(mesh), physics_(physics), ctl_(controls), bc_(std::move(bc)) {
  physics_.validate();
  if (bc_.filter_pressure.size() == 0) bc_.filter_pressure = bc_.pressure;
  if (bc_.velocity.size() != mesh.patches().size() || bc_.pressure.size() != mesh.patches().size() ||
      bc_.filter_pressure.size() != mesh.patches().size()) {
    throw ConfigError("boundary conditions do not match the mesh patches");
  }
  pattern_ = std::make_shared<Pattern>(mesh_);
  FomState s;
  s.v = Field::zeros(mesh_, 2);
  s.u = Field::zeros(mesh_, 2);
  s.q = Field::zeros(mesh_, 1);
  s.qbar = Field::zeros(mesh_, 1);
  s.t = physics_.t0;
  set_state(std::move(s));
  setup_filter();
}

void EvolveFilterSolver::set_state(FomState s) {
  bc_.velocity.apply(mesh_, s.v, s.t);
  bc_.velocity.apply(mesh_, s.u, s.t);
  bc_.pressure.apply(mesh_, s.q, s.t);
  bc_.filter_pressure.apply(mesh_, s.qbar, s.t);
  if (s.u_old.c.rows() != s.u.c.rows()) s.u_old = s.u;
  if (s.phi_u.size() != mesh_.n_faces()) s.phi_u = face_flux(mesh_, s.u);
  state_ = std::move(s);
}

void EvolveFilterSolver::pressure_matrix(const Eigen::VectorXd& gamma_f, double t, const BoundarySet& bcs, SpMat& M,
                                         Eigen::VectorXd& bsrc) const {
  const Pattern& pat = *pattern_;
  M = pat.base;
  double* val = M.valuePtr();
  const int ni = mesh_.n_internal_faces();
  for (int i = 0; i < ni; ++i) {
    const double a = gamma_f[i] * mesh_.delta_coeff(i);
    val[pat.diag[mesh_.owner(i)]] += a;
    val[pat.diag[mesh_.neighbour(i)]] += a;
    val[pat.pn[i]] -= a;
    val[pat.np[i]] -= a;
  }
  bsrc = Eigen::VectorXd::Zero(mesh_.n_cells());
  for (std::size_t p = 0; p < mesh_.patches().size(); ++p) {
    const Patch& patch = mesh_.patches()[p];
    const PatchBc& bc = bcs[static_cast<int>(p)];
    for (int i = patch.start; i < patch.start + patch.size; ++i) {
      const int o = mesh_.owner(i);
      const double a = gamma_f[i] * mesh_.delta_coeff(i);
      if (bc.kind == BcKind::FixedValue) {
        val[pat.diag[o]] += a;
        bsrc[o] += a * bc.fn(mesh_.face_centroid(i), t)[0];
      } else if (bc.kind == BcKind::FixedGradient) {
        bsrc[o] += gamma_f[i] * mesh_.face_mag(i) * bc.fn(mesh_.face_centroid(i), t)[0];
      }
    }
  }
}

Eigen::VectorXd EvolveFilterSolver::solve_pressure(const Eigen::VectorXd& gamma_f, const SpMat& M,
                                                   const Eigen::VectorXd& bsrc, const Eigen::VectorXd& div_rhs,
                                                   Field& p, double t, const DirectSpd* direct,
                                                   const BoundarySet& bcs) {
  Eigen::MatrixXd grad;
  for (int k = 0; k <= ctl_.nonorth_correctors; ++k) {
    grad = gauss_gradient(mesh_, p);
    const Eigen::VectorXd corr = laplacian_correction(mesh_, gamma_f, grad).col(0);
    const Eigen::VectorXd r = bsrc + corr - div_rhs;
    Eigen::VectorXd x = p.c.col(0);
    if (direct) {
      x = direct->solve(r);
    } else {
      evolve_p_cg_.solve(M, r, x, ctl_.p_tol, ctl_.max_linear_iter, "pressure");
    }
    p.c.col(0) = x;
    bcs.apply(mesh_, p, t);
  }
  return pressure_flux(mesh_, gamma_f, p, grad);
}

std::pair<Field, Field> EvolveFilterSolver::evolve_step(double t_next, double* continuity) {
  const Mesh& m = mesh_;
  const Pattern& pat = *pattern_;
  const int ni = m.n_internal_faces();
  const Eigen::VectorXd& V = m.cell_areas();
  const double rho = physics_.rho, mu = physics_.mu, dt = physics_.dt;
  const bool bdf1 = state_.step == 0;

  const double c0 = bdf1 ? rho / dt : 1.5 * rho / dt;
  Field ustar = bdf1 ? state_.u : 2.0 * state_.u - state_.u_old;
  Eigen::MatrixXd rhs = bdf1 ? Eigen::MatrixXd((rho / dt) * state_.u.c)
                             : Eigen::MatrixXd((rho / (2.0 * dt)) * (4.0 * state_.u.c - state_.u_old.c));
  rhs = scale_rows(rhs, V);
  const Eigen::VectorXd phi = face_flux(m, ustar);

  SpMat A = pat.base;
  double* val = A.valuePtr();
  for (int i = 0; i < ni; ++i) {
    const double F = rho * phi[i], a = mu * m.delta_coeff(i), w = m.weight(i);
    val[pat.diag[m.owner(i)]] += F * w + a;
    val[pat.pn[i]] += F * (1.0 - w) - a;
    val[pat.diag[m.neighbour(i)]] += -F * (1.0 - w) + a;
    val[pat.np[i]] += -F * w - a;
  }
  for (std::size_t p = 0; p < m.patches().size(); ++p) {
    const Patch& patch = m.patches()[p];
    const PatchBc& bc = bc_.velocity[static_cast<int>(p)];
    for (int i = patch.start; i < patch.start + patch.size; ++i) {
      const int o = m.owner(i);
      const double F = rho * phi[i], a = mu * m.delta_coeff(i);
      switch (bc.kind) {
        case BcKind::FixedValue:
          val[pat.diag[o]] += a;
          rhs.row(o) += (a - F) * bc.fn(m.face_centroid(i), t_next);
          break;
        case BcKind::ZeroGradient:
          val[pat.diag[o]] += F;
          break;
        case BcKind::FixedGradient:
          val[pat.diag[o]] += F;
          rhs.row(o) += (mu * m.face_mag(i) - F * m.face_mag(i) / m.delta_coeff(i)) * bc.fn(m.face_centroid(i), t_next);
          break;
      }
    }
  }
  for (int c = 0; c < m.n_cells(); ++c) val[pat.diag[c]] += c0 * V[c];

  const Eigen::VectorXd mu_f = Eigen::VectorXd::Constant(m.n_faces(), mu);
  rhs += laplacian_correction(m, mu_f, gauss_gradient(m, state_.v));

  Field v = state_.v;
  Field q = state_.q;
  {
    const Eigen::MatrixXd rhs_pred = rhs - scale_rows(gauss_gradient(m, q), V);
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd x = v.c.col(j);
      solve_bicgstab(A, rhs_pred.col(j), x, ctl_.u_tol, ctl_.max_linear_iter, j == 0 ? "momentum Ux" : "momentum Uy");
      v.c.col(j) = x;
    }
    bc_.velocity.apply(m, v, t_next);
  }

  const Eigen::VectorXd d = A.diagonal();
  const Eigen::VectorXd rAU = V.cwiseQuotient(d);
  const Eigen::VectorXd gamma_f = interp_cells(m, rAU);
  SpMat M;
  Eigen::VectorXd bsrc;
  pressure_matrix(gamma_f, t_next, bc_.pressure, M, bsrc);

  Eigen::VectorXd flux;
  for (int corr = 0; corr < ctl_.piso_correctors; ++corr) {
    Field HbyA(scale_rows(rhs - offdiag_product(A, d, v.c), d.cwiseInverse()), v.b);
    bc_.velocity.apply(m, HbyA, t_next);
    const Eigen::VectorXd phiHbyA = face_flux(m, HbyA);
    const Eigen::VectorXd pflux = solve_pressure(gamma_f, M, bsrc, surface_sum(m, phiHbyA), q, t_next, nullptr,
                                                     bc_.pressure);
    flux = phiHbyA - pflux;
    v.c = HbyA.c - scale_rows(gauss_gradient(m, q), rAU);
    bc_.velocity.apply(m, v, t_next);
  }
  check_finite(v, "v", t_next);
  check_finite(q, "q", t_next);
  if (continuity) *continuity = continuity_residual(m, flux);
  return {std::move(v), std::move(q)};
}

void EvolveFilterSolver::setup_filter() {
  const Mesh& m = mesh_;
  const Pattern& pat = *pattern_;
  const int ni = m.n_internal_faces();
  const Eigen::VectorXd& V = m.cell_areas();
  const double mub = physics_.mu_bar();

  filter_A_ = pat.base;
  double* val = filter_A_.valuePtr();
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(m.n_cells());
  for (int i = 0; i < ni; ++i) {
    const double a = mub * m.delta_coeff(i);
    val[pat.diag[m.owner(i)]] += a;
    val[pat.diag[m.neighbour(i)]] += a;
    val[pat.pn[i]] -= a;
    val[pat.np[i]] -= a;
    offsum[m.owner(i)] -= a;
    offsum[m.neighbour(i)] -= a;
  }
  for (std::size_t p = 0; p < m.patches().size(); ++p) {
    const Patch& patch = m.patches()[p];
    if (bc_.velocity[static_cast<int>(p)].kind != BcKind::FixedValue) continue;
    for (int i = patch.start; i < patch.start + patch.size; ++i) val[pat.diag[m.owner(i)]] += mub * m.delta_coeff(i);
  }
  for (int c = 0; c < m.n_cells(); ++c) val[pat.diag[c]] += physics_.rho / physics_.dt * V[c];

  const Eigen::VectorXd d = filter_A_.diagonal();
  filter_rAU_ = V.cwiseQuotient(d);
  filter_rAtU_ = V.cwiseQuotient(d + offsum);
  filter_gamma_f_ = interp_cells(m, filter_rAtU_);
  filter_gamma_diff_f_ = interp_cells(m, filter_rAtU_ - filter_rAU_);
  filter_mom_.compute(filter_A_);
  Eigen::VectorXd bsrc;
  pressure_matrix(filter_gamma_f_, physics_.t0, bc_.filter_pressure, filter_p_M_, bsrc);
  filter_p_.compute(filter_p_M_);
}

std::pair<Field, Field> EvolveFilterSolver::filter_step(const Field& v, double t_next, Eigen::VectorXd* flux_out,
                                                        StepReport* report) {
  const Mesh& m = mesh_;
  const Eigen::VectorXd& V = m.cell_areas();
  const double mub = physics_.mu_bar();
  const Eigen::VectorXd d = filter_A_.diagonal();

  Eigen::MatrixXd rhs_base = scale_rows((physics_.rho / physics_.dt) * v.c, V);
  for (std::size_t p = 0; p < m.patches().size(); ++p) {
    const Patch& patch = m.patches()[p];
    const PatchBc& bc = bc_.velocity[static_cast<int>(p)];
    for (int i = patch.start; i < patch.start + patch.size; ++i) {
      const int o = m.owner(i);
      if (bc.kind == BcKind::FixedValue) {
        rhs_base.row(o) += mub * m.delta_coeff(i) * bc.fn(m.face_centroid(i), t_next);
      } else if (bc.kind == BcKind::FixedGradient) {
        rhs_base.row(o) += mub * m.face_mag(i) * bc.fn(m.face_centroid(i), t_next);
      }
    }
  }
  SpMat unusedM;
  Eigen::VectorXd bsrc;
  pressure_matrix(filter_gamma_f_, t_next, bc_.filter_pressure, unusedM, bsrc);

  const Eigen::VectorXd mub_f = Eigen::VectorXd::Constant(m.n_faces(), mub);
  Field u = v;
  bc_.velocity.apply(m, u, t_next);
  Field qbar = state_.qbar;
  bc_.filter_pressure.apply(m, qbar, t_next);
  Eigen::VectorXd flux = face_flux(m, u);
  double residual = 0.0;
  int it = 0;
  while (it < ctl_.simplec_max_iter) {
    ++it;
    const Eigen::MatrixXd rhs_nop = rhs_base + laplacian_correction(m, mub_f, gauss_gradient(m, u));
    const Eigen::MatrixXd gq = gauss_gradient(m, qbar);
    const Eigen::MatrixXd rhs = rhs_nop - scale_rows(gq, V);
    for (int j = 0; j < 2; ++j) u.c.col(j) = filter_mom_.solve(rhs.col(j));
    bc_.velocity.apply(m, u, t_next);

    Field HbyA(scale_rows(rhs_nop - offdiag_product(filter_A_, d, u.c), d.cwiseInverse()), u.b);
    bc_.velocity.apply(m, HbyA, t_next);
    const Eigen::VectorXd phiHbyA = face_flux(m, HbyA) + pressure_flux(m, filter_gamma_diff_f_, qbar, gq);
    HbyA.c += scale_rows(gq, filter_rAtU_ - filter_rAU_);
    const Eigen::VectorXd div = surface_sum(m, phiHbyA);

    const double fsum = phiHbyA.cwiseAbs().sum();
    const Eigen::VectorXd imbalance = div - surface_sum(m, pressure_flux(m, filter_gamma_f_, qbar, gq));
    residual = fsum > 0.0 ? imbalance.cwiseAbs().sum() / fsum : 0.0;

    const Eigen::VectorXd pflux = solve_pressure(filter_gamma_f_, filter_p_M_, bsrc, div, qbar, t_next, &filter_p_,
                                                 bc_.filter_pressure);
    flux = phiHbyA - pflux;
    u.c = HbyA.c - scale_rows(gauss_gradient(m, qbar), filter_rAtU_);
    bc_.velocity.apply(m, u, t_next);
    check_finite(u, "u", t_next);
    check_finite(qbar, "qbar", t_next);
    if (residual <= ctl_.simplec_tol) break;
  }
  if (report) {
    report->simplec_iterations = it;
    report->simplec_residual = residual;
    report->continuity_u = continuity_residual(m, flux);
  }
  if (flux_out) *flux_out = std::move(flux);
  return {std::move(u), std::move(qbar)};
}

StepReport EvolveFilterSolver::step() {
  StepReport rep;
  const double t_next = physics_.t0 + (state_.step + 1) * physics_.dt;
  rep.t = t_next;
  auto [v, q] = evolve_step(t_next, &rep.continuity_v);
  Eigen::VectorXd flux;
  auto [u, qbar] = filter_step(v, t_next, &flux, &rep);
  state_.u_old = std::move(state_.u);
  state_.u = std::move(u);
  state_.v = std::move(v);
  state_.q = std::move(q);
  state_.qbar = std::move(qbar);
  state_.phi_u = std::move(flux);
  state_.t = t_next;
  ++state_.step;
  return rep;
}

}  // namespace romef
