#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "../common/oracles.hpp"
#include "romef/errors.hpp"
#include "romef/postproc.hpp"

using namespace romef;

namespace {

Field sample(const Mesh& mesh, int ncomp, const std::function<Eigen::Vector2d(const Vec2&)>& f) {
  Field out = Field::zeros(mesh, ncomp);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int k = 0; k < ncomp; ++k) out.c(c, k) = f(mesh.centroid(c))[k];
  for (int i = mesh.n_internal_faces(); i < mesh.n_faces(); ++i)
    for (int k = 0; k < ncomp; ++k) out.b(i - mesh.n_internal_faces(), k) = f(mesh.face_centroid(i))[k];
  return out;
}

}  // namespace

TEST_CASE("forces of a shear flow over a flat wall") {
  const double a = 3.0, lx = 1.0;
  const Mesh mesh = generate_rectangle_mesh(8, 4, lx, 0.5, {"in", "out", "floor", "lid"});
  const Field u = sample(mesh, 2, [&](const Vec2& x) { return Eigen::Vector2d(a * x.y(), 0.0); });
  const Field q = sample(mesh, 1, [](const Vec2& x) { return Eigen::Vector2d(1.0 + x.x(), 0.0); });
  AeroReference ref;
  ref.rho = 2.0;
  ref.mu = 0.01;
  ref.length = 0.5;
  ref.velocity = 2.0;
  ref.patch = "floor";
  const AeroCoefficients c = aero_coefficients(mesh, u, q, ref);
  // body below y = 0: traction (mu a, -q), integral of q over the wall is 1.5
  const double scale = 2.0 / (ref.rho * ref.length * ref.velocity * ref.velocity);
  CHECK(c.cd == doctest::Approx(scale * ref.mu * a * lx).epsilon(1e-13));
  CHECK(c.cl == doctest::Approx(-scale * 1.5).epsilon(1e-13));
  CHECK(c.cd_tn == doctest::Approx(c.cd).epsilon(1e-13));
  CHECK(c.cl_tn == doctest::Approx(c.cl).epsilon(1e-13));
  ref.patch = "nowhere";
  CHECK_THROWS_AS(aero_coefficients(mesh, u, q, ref), ConfigError);
}

TEST_CASE("pressure forces on the cylinder polygon") {
  const Mesh mesh = generate_cylinder_mesh(1200, 2.0);
  const Field zero = Field::zeros(mesh, 2);
  const AeroReference ref;
  const double scale = 2.0 / (ref.rho * ref.length * ref.velocity * ref.velocity);
  // a uniform pressure on a closed polygon exerts no force
  const Field q1 = sample(mesh, 1, [](const Vec2&) { return Eigen::Vector2d(1.0, 0.0); });
  const AeroCoefficients c1 = aero_coefficients(mesh, zero, q1, ref);
  CHECK(std::abs(c1.cd) <= 1e-14 * scale);
  CHECK(std::abs(c1.cl) <= 1e-14 * scale);
  // q = x: the force is minus the enclosed area along x (divergence theorem)
  const double body = 2.2 * 0.41 - mesh.total_area();
  const Field qx = sample(mesh, 1, [](const Vec2& x) { return Eigen::Vector2d(x.x(), 0.0); });
  const AeroCoefficients cx = aero_coefficients(mesh, zero, qx, ref);
  CHECK(cx.cd == doctest::Approx(-scale * body).epsilon(1e-10));
  CHECK(std::abs(cx.cl) <= 1e-12 * scale * body);
}

TEST_CASE("force coefficients are linear in velocity and pressure") {
  const Mesh mesh = generate_cylinder_mesh(800, 2.0);
  std::mt19937 rng(8);
  const Field u1 = romef::testing::smooth_random_field(mesh, 2, rng), u2 = romef::testing::smooth_random_field(mesh, 2, rng);
  const Field q1 = romef::testing::smooth_random_field(mesh, 1, rng), q2 = romef::testing::smooth_random_field(mesh, 1, rng);
  const AeroReference ref;
  Field u = u1, q = q1;
  u *= 2.5;
  u += u2;
  q *= 2.5;
  q += q2;
  const Eigen::Vector4d lhs = aero_coefficients(mesh, u, q, ref).as_vector();
  const Eigen::Vector4d rhs =
      2.5 * aero_coefficients(mesh, u1, q1, ref).as_vector() + aero_coefficients(mesh, u2, q2, ref).as_vector();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("relative field errors") {
  const Mesh mesh = generate_rectangle_mesh(6, 3, 1.0, 1.0);
  Field fom = Field::zeros(mesh, 2), rom = Field::zeros(mesh, 2);
  fom.c.col(0).setConstant(2.0);
  rom.c.col(0).setConstant(1.8);
  rom.c.col(1).setConstant(0.2);
  const RelativeError e = relative_error(mesh, fom, rom);
  CHECK(e.value == doctest::Approx(std::sqrt(0.08) / 2.0));
  CHECK_FALSE(e.absolute);

  const RelativeError z = relative_error(mesh, Field::zeros(mesh, 2), rom);
  CHECK(z.absolute);
  CHECK(z.value == doctest::Approx(std::sqrt(1.8 * 1.8 + 0.04)));
  CHECK_THROWS_AS(relative_error(mesh, fom, Field::zeros(generate_rectangle_mesh(3, 3, 1.0, 1.0), 2)), FingerprintError);
}

TEST_CASE("error summaries and time norms") {
  const ErrorSummary s = summarize({0.3, 0.1, 0.2});
  CHECK(s.min == 0.1);
  CHECK(s.max == 0.3);
  CHECK(s.avg == doctest::Approx(0.2));
  const ErrorSummary n = summarize({0.1, std::numeric_limits<double>::quiet_NaN()});
  CHECK(std::isnan(n.min));
  CHECK(std::isnan(n.avg));
  CHECK(std::isnan(n.max));

  // f = t on {0, 0.5, 1}: 0.25 (0 + 0.25) + 0.25 (0.25 + 1)
  CHECK(trapezoid_l2({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}) == doctest::Approx(std::sqrt(0.375)));
  CHECK_THROWS_AS(trapezoid_l2({0.0, 1.0}, {1.0}), std::invalid_argument);

  const std::vector<double> t{0.0, 0.5, 1.0}, f{1.0, 1.0, 1.0}, g{1.1, 1.1, 1.1};
  CHECK(coefficient_error(t, f, t, g) == doctest::Approx(0.1));
  CHECK(coefficient_error(t, {0.0, 0.0, 0.0}, t, g) == doctest::Approx(1.1));
  CHECK_THROWS_AS(coefficient_error(t, f, {0.0, 0.5}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(coefficient_error(t, f, {0.0, 0.6, 1.0}, g), std::invalid_argument);
}
