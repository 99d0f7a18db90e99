#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "romef/errors.hpp"
#include "romef/pod.hpp"
#include "romef/supremizer.hpp"

using namespace romef;

namespace {

/// Series solution of -Laplace(u) = 1 on the unit square with u = 0 on the boundary.
double poisson_square(double x, double y) {
  double u = 0.0;
  for (int m = 1; m < 400; m += 2)
    for (int n = 1; n < 400; n += 2)
      u += 16.0 / (std::pow(M_PI, 4) * m * n * (m * m + n * n)) * std::sin(m * M_PI * x) * std::sin(n * M_PI * y);
  return u;
}

Field scalar(const Mesh& mesh, const std::function<double(const Vec2&)>& f) {
  Field out = Field::zeros(mesh, 1);
  for (int c = 0; c < mesh.n_cells(); ++c) out.c(c, 0) = f(mesh.centroid(c));
  for (int i = mesh.n_internal_faces(); i < mesh.n_faces(); ++i) out.b(i - mesh.n_internal_faces(), 0) = f(mesh.face_centroid(i));
  return out;
}

}  // namespace

TEST_CASE("supremizer of q = x on the unit square") {
  const double center = poisson_square(0.5, 0.5);
  CHECK(center == doctest::Approx(0.0736713).epsilon(1e-5));

  const Mesh mesh = generate_rectangle_mesh(41, 41, 1.0, 1.0, {"a", "a", "a", "a"});
  const SupremizerSolver solver(mesh);
  const Field s = solver.solve(scalar(mesh, [](const Vec2& x) { return x.x(); }));
  CHECK(solver.last_residual() <= 1e-10);
  int mid = 0;
  for (int c = 0; c < mesh.n_cells(); ++c)
    if ((mesh.centroid(c) - Vec2(0.5, 0.5)).norm() < 1e-9) mid = c;
  CHECK(s.c(mid, 0) == doctest::Approx(center).epsilon(2e-3));
  CHECK(s.c.col(1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.b.cwiseAbs().maxCoeff() == 0.0);

  // the whole field, against the series at the cell centres
  double e = 0.0, n = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double ref = poisson_square(mesh.centroid(c).x(), mesh.centroid(c).y());
    e += std::pow(s.c(c, 0) - ref, 2);
    n += ref * ref;
  }
  CHECK(std::sqrt(e / n) <= 5e-3);
}

TEST_CASE("supremizer of a constant pressure vanishes") {
  const Mesh mesh = generate_cylinder_mesh(600, 2.0);
  const SupremizerSolver solver(mesh);
  const Field s = solver.solve(scalar(mesh, [](const Vec2&) { return 3.0; }));
  CHECK(s.c.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("supremizers of a pressure set") {
  const Mesh mesh = generate_cylinder_mesh(600, 2.0);
  std::mt19937 rng(9);
  const SnapshotMatrix q = romef::testing::smooth_random_space(mesh, "qbar", 1, 4, rng);
  const SupremizerSolver solver(mesh);
  const SnapshotMatrix s = solver.solve_all(q, "sbar");
  CHECK(s.cols() == 4);
  CHECK(s.ncomp == 2);
  CHECK(s.times == q.times);
  CHECK(s.name == "sbar");
  CHECK(s.fingerprint == mesh.fingerprint());
  const int nb = mesh.n_faces() - mesh.n_internal_faces();
  CHECK(s.data.bottomRows(2 * nb).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.last_residual() <= 1e-10);

  // non-orthogonal mesh: Delta s = -grad q holds for the full (corrected) Laplacian
  const Field s0 = s.column(0);
  const Eigen::MatrixXd lap = apply_laplacian(mesh, 1.0, s0);
  const Eigen::MatrixXd g = gauss_gradient(mesh, q.column(0));
  double worst = 0.0, scale = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    worst = std::max(worst, (lap.row(c) / mesh.area(c) + g.row(c)).cwiseAbs().maxCoeff());
    scale = std::max(scale, g.row(c).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8 * scale);
}

TEST_CASE("enriched spaces") {
  const Mesh mesh = generate_cylinder_mesh(400, 2.0);
  std::mt19937 rng(12);
  const Eigen::VectorXd w = snapshot_weights(mesh, 2);
  const SnapshotMatrix v = romef::testing::smooth_random_space(mesh, "v", 2, 2, rng);
  const SnapshotMatrix s = romef::testing::smooth_random_space(mesh, "s", 2, 4, rng);
  const SnapshotMatrix sbar = romef::testing::smooth_random_space(mesh, "sbar", 2, 3, rng);
  SnapshotMatrix none = SnapshotMatrix::empty("s", mesh, 2);

  SUBCASE("no supremizers") {
    const EnrichedSpace e = enrich({{"v", &v}, {"s", &none}}, w);
    CHECK(e.size() == 2);
    CHECK(e.columns.data == v.data);
    CHECK(e.blocks.size() == 1);
  }
  SUBCASE("block layout") {
    const EnrichedSpace e = enrich({{"v", &v}, {"s", &s}}, w);
    CHECK(e.size() == 6);
    CHECK(e.columns.data.leftCols(2) == v.data);
    CHECK(e.columns.data.rightCols(4) == s.data);
    CHECK(e.gram_min_eigenvalue > 1e-10);
    const EnrichedSpace e2 = enrich({{"u", &v}, {"sbar", &sbar}, {"s", &s}}, w);
    CHECK(e2.size() == 9);
    CHECK(e2.blocks[1].first == "sbar");
    CHECK(e2.blocks[1].second == 3);
  }
  SUBCASE("near dependence is refused") {
    SnapshotMatrix dup = v;
    dup.data.col(1) = v.data.col(0) * (1.0 + 1e-13);
    CHECK_THROWS_AS(enrich({{"v", &v}, {"s", &dup}}, w), ConfigError);
  }
  SUBCASE("mixed meshes are refused") {
    const Mesh other = generate_cylinder_mesh(300, 2.0);
    const SnapshotMatrix o = romef::testing::smooth_random_space(other, "s", 2, 1, rng);
    CHECK_THROWS_AS(enrich({{"v", &v}, {"s", &o}}, w), FingerprintError);
  }
}
