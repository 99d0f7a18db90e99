#include "romef/rom_online.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "romef/errors.hpp"

namespace romef {

namespace {

Eigen::VectorXd aug(double g, const Eigen::VectorXd& c) {
  Eigen::VectorXd a(c.size() + 1);
  a[0] = g;
  a.tail(c.size()) = c;
  return a;
}

double rel_residual(const Eigen::MatrixXd& L, const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
  const double rn = r.norm();
  const double e = (L * x - r).norm();
  return rn > 0.0 ? e / rn : e;
}

// Eigen's estimate only looks at the pivoted factors and stays O(1) when the
// trailing pivots vanish, so rank deficiency is checked first.
double full_rcond(const Eigen::FullPivLU<Eigen::MatrixXd>& lu) { return lu.isInvertible() ? lu.rcond() : 0.0; }

}  // namespace

RomSolver::RomSolver(const ReducedOperators& ops, StabMode mode) : ops_(ops), mode_(mode) {
  const auto meta = nlohmann::json::parse(ops.meta);
  const auto& ph = meta.at("physics");
  rho_ = ph.at("rho").get<double>();
  mu_ = ph.at("mu").get<double>();
  mu_bar_ = ph.at("mu_bar").get<double>();
  dt_ = ph.at("dt").get<double>();
  law_ = inlet_law(meta.at("inlet_law").get<std::string>());
  const std::string stored = meta.at("mode").get<std::string>();
  if (parse_stab_mode(stored) != mode) {
    throw ConfigError("operators were assembled for mode " + stored + ", not " + to_string(mode));
  }
  setup();
}

RomSolver::RomSolver(const ReducedOperators& ops, StabMode mode, double rho, double mu, double mu_bar, double dt,
                     std::function<double(double)> law)
    : ops_(ops), mode_(mode), rho_(rho), mu_(mu), mu_bar_(mu_bar), dt_(dt), law_(std::move(law)) {
  setup();
}

void RomSolver::setup() {
  ppe_ = mode_ == StabMode::Ppe;
  const Eigen::MatrixXd& M = ops_.mat("M");
  const Eigen::MatrixXd& A = ops_.mat("A");
  Mt_ = &ops_.mat("Mt");
  B_ = &ops_.mat("B");
  G_ = &ops_.tensor("G");
  MtT_ = &ops_.mat("MtT");
  aero_u_ = &ops_.mat("aero_u");
  aero_q_ = &ops_.mat("aero_q");
  dims_.nv = static_cast<int>(M.rows());
  dims_.nq = static_cast<int>(B_->cols());
  dims_.nu = static_cast<int>(ops_.mat("Mbar").rows());
  dims_.nqbar = static_cast<int>(ops_.mat("Bbar").cols());
  const int nv = dims_.nv, nq = dims_.nq, nu = dims_.nu, nqb = dims_.nqbar;

  K1_ = (rho_ / dt_) * M - mu_ * A;
  K2_ = (1.5 * rho_ / dt_) * M - mu_ * A;
  if (ppe_) {
    J_ = &ops_.tensor("J");
    D_ = &ops_.mat("D");
    Fbar_ = &ops_.mat("Fbar");
    Nbar_ = &ops_.mat("Nbar");
    const Eigen::MatrixXd& N = ops_.mat("N");
    const Eigen::MatrixXd& F = ops_.mat("F");
    Kp1_ = (rho_ / dt_) * F - mu_ * N;
    Kp2_ = (1.5 * rho_ / dt_) * F - mu_ * N;
  } else {
    P_ = &ops_.mat("P");
    Pbar_ = &ops_.mat("Pbar");
  }

  const Eigen::MatrixXd& Mbar = ops_.mat("Mbar");
  const Eigen::MatrixXd& Abar = ops_.mat("Abar");
  const Eigen::MatrixXd Kb = (rho_ / dt_) * Mbar - mu_bar_ * Abar;
  kb0_ = Kb.col(0);
  filter_lhs_ = Eigen::MatrixXd::Zero(nu + nqb, nu + nqb);
  filter_lhs_.topLeftCorner(nu, nu) = Kb.rightCols(nu);
  filter_lhs_.topRightCorner(nu, nqb) = ops_.mat("Bbar");
  if (ppe_) {
    filter_lhs_.bottomLeftCorner(nqb, nu) = -mu_bar_ * Nbar_->rightCols(nu);
    filter_lhs_.bottomRightCorner(nqb, nqb) = ops_.mat("Dbar");
  } else {
    filter_lhs_.bottomLeftCorner(nqb, nu) = Pbar_->rightCols(nu);
  }
  if (mode_ == StabMode::Nos) {
    filter_full_.compute(filter_lhs_);
    filter_rcond_ = full_rcond(filter_full_);
  } else {
    filter_partial_.compute(filter_lhs_);
    filter_rcond_ = filter_partial_.rcond();
  }

  w_.K.resize(nv, nv + 1);
  w_.Kp.resize(nq, nv + 1);
  w_.L = Eigen::MatrixXd::Zero(nv + nq, nv + nq);
  w_.L.topRightCorner(nv, nq) = *B_;
  if (ppe_) {
    w_.L.bottomRightCorner(nq, nq) = *D_;
  } else {
    w_.L.bottomLeftCorner(nq, nv) = P_->rightCols(nv);
  }
  w_.r.resize(nv + nq);
  w_.rf.resize(nu + nqb);
  w_.un.resize(nu + 1);
  w_.unm1.resize(nu + 1);
  w_.ustar.resize(nu + 1);
  w_.hist.resize(nu + 1);
  w_.ug.resize(nv + 1);
}

RomState RomSolver::initial_state(double t0) const {
  RomState s;
  s.beta = ops_.mat("beta0").col(0);
  s.gamma = ops_.mat("gamma0").col(0);
  s.beta_bar = ops_.mat("betabar0").col(0);
  s.gamma_bar = ops_.mat("gammabar0").col(0);
  s.beta_bar_old = s.beta_bar;
  s.t = t0;
  s.t0 = t0;
  return s;
}

Eigen::Vector4d RomSolver::aero(const RomState& s) const {
  return (*aero_u_) * aug(law_(s.t), s.beta_bar) + (*aero_q_) * s.gamma;
}

namespace {

void add_contraction(Eigen::MatrixXd& out, const Tensor3& T, const Eigen::VectorXd& w, double scale) {
  for (int k = 0; k < T.n2; ++k) out.noalias() += (scale * w[k]) * T.slice(k);
}

}  // namespace

RomStepInfo RomSolver::step(RomState& s) const {
  const int nv = dims_.nv, nq = dims_.nq, nu = dims_.nu, nqb = dims_.nqbar;
  const bool first = s.step == 0;
  const double c1 = first ? 1.0 : 2.0, c2 = first ? 0.0 : -0.5;
  const double t1 = s.t0 + (s.step + 1) * dt_;
  const double g1 = law_(t1);
  Work& w = w_;
  w.un[0] = law_(s.t);
  w.un.tail(nu) = s.beta_bar;
  w.unm1[0] = law_(s.t - dt_);
  w.unm1.tail(nu) = s.beta_bar_old;
  if (first) {
    w.ustar = w.un;
  } else {
    w.ustar = 2.0 * w.un - w.unm1;
  }
  w.hist = c1 * w.un + c2 * w.unm1;

  RomStepInfo info;
  // evolve
  w.K = first ? K1_ : K2_;
  add_contraction(w.K, *G_, w.ustar, rho_);
  w.L.topLeftCorner(nv, nv) = w.K.rightCols(nv);
  w.r.head(nv).noalias() = (rho_ / dt_) * (*Mt_) * w.hist;
  w.r.head(nv) -= w.K.col(0) * g1;
  if (ppe_) {
    w.Kp = first ? Kp1_ : Kp2_;
    add_contraction(w.Kp, *J_, w.ustar, rho_);
    w.L.bottomLeftCorner(nq, nv) = w.Kp.rightCols(nv);
    w.r.tail(nq).noalias() = (rho_ / dt_) * (*Fbar_) * w.hist;
    w.r.tail(nq) -= w.Kp.col(0) * g1;
  } else {
    w.r.tail(nq) = -P_->col(0) * g1;
  }
  if (mode_ == StabMode::Nos) {
    w.full.compute(w.L);
    w.x = w.full.solve(w.r);
    info.rcond_evolve = full_rcond(w.full);
  } else {
    w.partial.compute(w.L);
    w.x = w.partial.solve(w.r);
    info.rcond_evolve = w.partial.rcond();
  }
  info.residual = rel_residual(w.L, w.x, w.r);
  s.beta = w.x.head(nv);
  s.gamma = w.x.tail(nq);

  // filter
  w.ug[0] = g1;
  w.ug.tail(nv) = s.beta;
  w.rf.head(nu).noalias() = (rho_ / dt_) * (*MtT_) * w.ug;
  w.rf.head(nu) -= kb0_ * g1;
  if (ppe_) {
    w.rf.tail(nqb) = mu_bar_ * Nbar_->col(0) * g1;
  } else {
    w.rf.tail(nqb) = -Pbar_->col(0) * g1;
  }
  if (mode_ == StabMode::Nos) {
    w.y = filter_full_.solve(w.rf);
  } else {
    w.y = filter_partial_.solve(w.rf);
  }
  info.rcond_filter = filter_rcond_;
  info.residual = std::max(info.residual, rel_residual(filter_lhs_, w.y, w.rf));
  info.singular = !(info.rcond_evolve > 1e-14) || !(info.rcond_filter > 1e-14);

  s.beta_bar_old = s.beta_bar;
  s.beta_bar = w.y.head(nu);
  s.gamma_bar = w.y.tail(nqb);
  s.t = t1;
  ++s.step;
  return info;
}

RomTrajectory run_rom(const RomSolver& solver, double t0, int n_steps, int timing_repeats) {
  if (n_steps < 0) throw ConfigError("negative step count");
  const RomDims& d = solver.dims();
  RomTrajectory tr;
  const auto n = static_cast<Eigen::Index>(n_steps) + 1;
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < std::max(1, timing_repeats); ++rep) {
    tr.t.assign(static_cast<std::size_t>(n), 0.0);
    tr.beta.setConstant(d.nv, n, std::numeric_limits<double>::quiet_NaN());
    tr.gamma.setConstant(d.nq, n, std::numeric_limits<double>::quiet_NaN());
    tr.beta_bar.setConstant(d.nu, n, std::numeric_limits<double>::quiet_NaN());
    tr.gamma_bar.setConstant(d.nqbar, n, std::numeric_limits<double>::quiet_NaN());
    tr.rcond_evolve.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    tr.rcond_filter.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    tr.aero.assign(static_cast<std::size_t>(n), Eigen::Vector4d::Constant(std::numeric_limits<double>::quiet_NaN()));
    tr.max_residual = 0.0;
    tr.singular_steps = 0;
    tr.blow_up_step = -1;

    const auto start = std::chrono::steady_clock::now();
    RomState s = solver.initial_state(t0);
    auto record = [&](Eigen::Index k) {
      tr.t[static_cast<std::size_t>(k)] = s.t;
      tr.beta.col(k) = s.beta;
      tr.gamma.col(k) = s.gamma;
      tr.beta_bar.col(k) = s.beta_bar;
      tr.gamma_bar.col(k) = s.gamma_bar;
      tr.aero[static_cast<std::size_t>(k)] = solver.aero(s);
    };
    record(0);
    for (Eigen::Index k = 1; k < n; ++k) {
      const RomStepInfo info = solver.step(s);
      tr.rcond_evolve[static_cast<std::size_t>(k)] = info.rcond_evolve;
      tr.rcond_filter[static_cast<std::size_t>(k)] = info.rcond_filter;
      if (info.singular) ++tr.singular_steps;
      const bool finite = s.beta.allFinite() && s.gamma.allFinite() && s.beta_bar.allFinite() &&
                          s.gamma_bar.allFinite();
      if (!finite) {
        tr.blow_up_step = static_cast<int>(k);
        for (Eigen::Index m = k; m < n; ++m) tr.t[static_cast<std::size_t>(m)] = t0 + static_cast<double>(m) * solver.dt();
        break;
      }
      if (std::isfinite(info.residual)) tr.max_residual = std::max(tr.max_residual, info.residual);
      record(k);
    }
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  tr.online_seconds = best;
  return tr;
}

}  // namespace romef
