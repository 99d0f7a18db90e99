#include "romef/postproc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "romef/errors.hpp"

namespace romef {

AeroCoefficients aero_coefficients(const Mesh& mesh, const Field& u, const Field& q, const AeroReference& ref) {
  const int p = mesh.patch_index(ref.patch);
  if (p < 0) throw ConfigError("mesh has no patch '" + ref.patch + "'");
  const Patch& patch = mesh.patches()[static_cast<std::size_t>(p)];
  const int ni = mesh.n_internal_faces();
  Vec2 force = Vec2::Zero();
  double ft = 0.0, fn = 0.0;
  for (int f = patch.start; f < patch.start + patch.size; ++f) {
    const int o = mesh.owner(f);
    const int bf = f - ni;
    const Vec2& S = mesh.face_area(f);
    const double mag = mesh.face_mag(f);
    const Vec2 nhat = S / mag;  // out of the fluid, into the body
    const double dn = (mesh.face_centroid(f) - mesh.centroid(o)).dot(nhat);
    const Vec2 uf(u.b(bf, 0), u.b(bf, 1)), uc(u.c(o, 0), u.c(o, 1));
    // traction exerted by the fluid on the body
    const Vec2 tr = ref.mu * (uc - uf) / dn + q.b(bf, 0) * nhat;
    force += tr * mag;
    const Vec2 nb = -nhat;
    const Vec2 tb(nb.y(), -nb.x());
    ft += tr.dot(tb) * mag;
    fn += tr.dot(nb) * mag;
  }
  const double scale = 2.0 / (ref.rho * ref.length * ref.velocity * ref.velocity);
  return {scale * force.x(), scale * force.y(), scale * ft, scale * fn};
}

RelativeError relative_error(const Mesh& mesh, const Field& fom, const Field& rom, double norm_floor) {
  if (fom.c.rows() != mesh.n_cells() || rom.c.rows() != mesh.n_cells() || fom.ncomp() != rom.ncomp()) {
    throw FingerprintError("relative_error: fields do not live on the same mesh");
  }
  const Eigen::VectorXd& V = mesh.cell_areas();
  const double den = std::sqrt((fom.c.array().square().colwise() * V.array()).sum());
  const double num = std::sqrt(((fom.c - rom.c).array().square().colwise() * V.array()).sum());
  if (den < norm_floor) return {num, true};
  return {num / den, false};
}

ErrorSummary summarize(const std::vector<double>& s) {
  if (s.empty()) return {};
  ErrorSummary e{s.front(), 0.0, s.front()};
  for (double x : s) {
    if (std::isnan(x)) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {nan, nan, nan};
    }
    e.min = std::min(e.min, x);
    e.max = std::max(e.max, x);
    e.avg += x;
  }
  e.avg /= static_cast<double>(s.size());
  return e;
}

double trapezoid_l2(const std::vector<double>& t, const std::vector<double>& f) {
  if (t.size() != f.size()) throw std::invalid_argument("trapezoid_l2: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (f[i] * f[i] + f[i - 1] * f[i - 1]);
  return std::sqrt(acc);
}

double coefficient_error(const std::vector<double>& t_fom, const std::vector<double>& fom,
                         const std::vector<double>& t_rom, const std::vector<double>& rom) {
  if (t_fom.size() != t_rom.size() || fom.size() != t_fom.size() || rom.size() != t_rom.size()) {
    throw std::invalid_argument("coefficient_error: time grids differ in length");
  }
  for (std::size_t i = 0; i < t_fom.size(); ++i) {
    if (std::abs(t_fom[i] - t_rom[i]) > 1e-9 * std::max(1.0, std::abs(t_fom[i]))) {
      throw std::invalid_argument("coefficient_error: time grids differ at index " + std::to_string(i));
    }
  }
  std::vector<double> diff(fom.size());
  for (std::size_t i = 0; i < fom.size(); ++i) diff[i] = fom[i] - rom[i];
  const double den = trapezoid_l2(t_fom, fom);
  if (den == 0.0) return trapezoid_l2(t_fom, diff);
  return trapezoid_l2(t_fom, diff) / den;
}

}  // namespace romef
