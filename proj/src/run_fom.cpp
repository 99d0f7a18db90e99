#include "romef/run_fom.hpp"

#include <chrono>
#include <cmath>

#include "romef/errors.hpp"

namespace romef {

namespace {

FomHistoryRow history_row(const Mesh& mesh, const FomState& s, const AeroReference& aero) {
  FomHistoryRow r;
  r.t = s.t;
  r.aero = aero_coefficients(mesh, s.u, s.q, aero);
  r.max_u = s.u.c.rowwise().norm().maxCoeff();
  r.continuity = continuity_residual(mesh, s.phi_u);
  return r;
}

}  // namespace

int sample_stride(double interval, double dt) {
  if (!(interval > 0.0)) throw ConfigError("snapshot interval must be positive");
  const double ratio = interval / dt;
  const long long n = std::llround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6) {
    throw ConfigError("time step must divide the snapshot interval");
  }
  return static_cast<int>(n);
}

FomRunResult run_fom(EvolveFilterSolver& solver, int stride, const AeroReference& aero,
                     const std::function<void(const StepReport&)>& progress) {
  if (stride < 1) throw ConfigError("sample stride must be at least 1");
  const Mesh& mesh = solver.mesh();
  FomRunResult res;
  res.v = SnapshotMatrix::empty("v", mesh, 2);
  res.u = SnapshotMatrix::empty("u", mesh, 2);
  res.q = SnapshotMatrix::empty("q", mesh, 1);
  res.qbar = SnapshotMatrix::empty("qbar", mesh, 1);
  res.history.push_back(history_row(mesh, solver.state(), aero));

  const int n_steps = solver.physics().n_steps() - solver.state().step;
  const auto start = std::chrono::steady_clock::now();
  for (int n = 0; n < n_steps; ++n) {
    StepReport rep;
    try {
      rep = solver.step();
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (FOM step " + std::to_string(solver.state().step + 1) + ")");
    }
    const FomState& s = solver.state();
    FomHistoryRow row = history_row(mesh, s, aero);
    row.simplec_iterations = rep.simplec_iterations;
    res.history.push_back(row);
    if (s.step % stride == 0) {
      res.v.append(s.v, s.t);
      res.u.append(s.u, s.t);
      res.q.append(s.q, s.t);
      res.qbar.append(s.qbar, s.t);
    }
    if (progress) progress(rep);
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace romef
