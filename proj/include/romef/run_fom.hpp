#pragma once

#include <functional>
#include <vector>

#include "romef/fom.hpp"
#include "romef/postproc.hpp"
#include "romef/snapshots.hpp"

namespace romef {

struct FomHistoryRow {
  double t = 0.0;
  AeroCoefficients aero;
  double max_u = 0.0;
  double continuity = 0.0;  // of the filtered flux
  int simplec_iterations = 0;
};

struct FomRunResult {
  SnapshotMatrix v, u, q, qbar;  // full fields, not homogenised
  std::vector<FomHistoryRow> history;  // t0 and every step
  double wall_seconds = 0.0;  // time stepping only
};

/// Steps the evolve-filter solver from its current state to physics.T,
/// collecting snapshots every `sample_stride` steps (counted from t0).
/// `progress`, when set, sees every step report.
FomRunResult run_fom(EvolveFilterSolver& solver, int sample_stride, const AeroReference& aero,
                     const std::function<void(const StepReport&)>& progress = {});

/// Number of steps between samples; throws ConfigError unless dt divides
/// the interval.
int sample_stride(double interval, double dt);

}  // namespace romef
