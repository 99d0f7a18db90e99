#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romef/field.hpp"
#include "romef/mesh.hpp"

namespace romef {

struct AeroReference {
  double rho = 1.0;
  double mu = 1e-3;
  double length = 0.1;    // L_r
  double velocity = 1.0;  // U_r
  std::string patch = "cylinder";
};

/// Force coefficients on a body patch. `cd`, `cl` project the force on x and
/// y; `cd_tn`, `cl_tn` integrate the traction against the local tangent
/// t = (n_y, -n_x) and the normal n, with n pointing from the body into the
/// fluid.
struct AeroCoefficients {
  double cd = 0.0;
  double cl = 0.0;
  double cd_tn = 0.0;
  double cl_tn = 0.0;

  Eigen::Vector4d as_vector() const { return {cd, cl, cd_tn, cl_tn}; }
};

/// Integrates  mu du/dn - q n  over the patch faces, with du/dn from the
/// owner cell and the face value, q from the face value. Linear in (u, q).
/// Throws ConfigError when the patch does not exist.
AeroCoefficients aero_coefficients(const Mesh& mesh, const Field& u, const Field& q, const AeroReference& ref);

struct RelativeError {
  double value = 0.0;
  /// Reference norm below the threshold: `value` is the absolute error.
  bool absolute = false;
};

/// ||fom - rom|| / ||fom|| in the cell L2 norm.
RelativeError relative_error(const Mesh& mesh, const Field& fom, const Field& rom, double norm_floor = 1e-14);

struct ErrorSummary {
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
};

/// All three entries are NaN when any sample is NaN.
ErrorSummary summarize(const std::vector<double>& series);

/// Trapezoidal L2(t0, t1) norm of a sampled series.
double trapezoid_l2(const std::vector<double>& t, const std::vector<double>& f);

/// ||fom - rom|| / ||fom|| in L2 over time; series must share the grid.
/// Throws std::invalid_argument on a grid mismatch.
double coefficient_error(const std::vector<double>& t_fom, const std::vector<double>& fom,
                         const std::vector<double>& t_rom, const std::vector<double>& rom);

}  // namespace romef
