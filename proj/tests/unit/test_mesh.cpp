#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../common/temp_dir.hpp"
#include "romef/mesh.hpp"

using namespace romef;

namespace {

double closure_defect(const Mesh& mesh) {
  double worst = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Vec2 s = Vec2::Zero();
    for (int f : mesh.cell_faces(c)) s += (mesh.owner(f) == c ? 1.0 : -1.0) * mesh.face_area(f);
    worst = std::max(worst, s.norm());
  }
  return worst;
}

double patch_length(const Mesh& mesh, const std::string& name) {
  const Patch& p = mesh.patch(name);
  double l = 0.0;
  for (int f = p.start; f < p.start + p.size; ++f) l += mesh.face_mag(f);
  return l;
}

}  // namespace

TEST_CASE("rectangle mesh geometry") {
  const Mesh m = generate_rectangle_mesh(5, 3, 2.0, 0.6);
  CHECK(m.n_cells() == 15);
  CHECK(m.n_internal_faces() == 4 * 3 + 5 * 2);
  CHECK(m.total_area() == doctest::Approx(1.2).epsilon(1e-14));
  for (int c = 0; c < m.n_cells(); ++c) CHECK(m.area(c) == doctest::Approx(0.4 * 0.2).epsilon(1e-14));
  CHECK(closure_defect(m) <= 1e-14);
  CHECK(patch_length(m, "inlet") == doctest::Approx(0.6));
  CHECK(patch_length(m, "walls") == doctest::Approx(4.0));
  for (int f = 0; f < m.n_internal_faces(); ++f) {
    CHECK(m.weight(f) == doctest::Approx(0.5));
    CHECK(m.correction_vector(f).norm() <= 1e-14);
  }
  // boundary delta coefficient |S| / (h / 2)
  const int f = m.patch("inlet").start;
  CHECK(m.delta_coeff(f) == doctest::Approx(0.2 / 0.2));
  const auto q = m.quality();
  CHECK(q.max_non_orthogonality_deg <= 1e-9);
  CHECK(q.max_aspect_ratio == doctest::Approx(2.0));
}

TEST_CASE("cylinder mesh") {
  const Mesh m = generate_cylinder_mesh(2000, 2.0);
  CHECK(std::abs(m.n_cells() - 2000) <= 200);
  const double exact = 0.41 * 2.2 - M_PI * 0.05 * 0.05;
  CHECK(m.total_area() == doctest::Approx(exact).epsilon(2e-4));
  CHECK(closure_defect(m) <= 1e-13);
  for (const char* p : {"inlet", "outlet", "walls", "cylinder"}) CHECK(m.patch_index(p) >= 0);
  CHECK(patch_length(m, "inlet") == doctest::Approx(0.41).epsilon(1e-12));
  CHECK(patch_length(m, "outlet") == doctest::Approx(0.41).epsilon(1e-12));
  CHECK(patch_length(m, "walls") == doctest::Approx(4.4).epsilon(1e-12));
  CHECK(patch_length(m, "cylinder") == doctest::Approx(2 * M_PI * 0.05).epsilon(1e-3));
  // the cylinder vertices lie on the circle
  const Patch& cyl = m.patch("cylinder");
  for (int f = cyl.start; f < cyl.start + cyl.size; ++f) {
    CHECK((m.vertices()[m.face_v0(f)] - Vec2(0.2, 0.2)).norm() == doctest::Approx(0.05).epsilon(1e-12));
  }
  for (int c = 0; c < m.n_cells(); ++c) REQUIRE(m.area(c) > 0.0);
  const auto q = m.quality();
  CHECK(q.max_non_orthogonality_deg < 45.0);
  CHECK(q.avg_non_orthogonality_deg < 5.0);
  CHECK(std::isfinite(q.max_skewness));

  const Mesh finer = generate_cylinder_mesh(8000, 2.0);
  CHECK(finer.n_cells() > 3 * m.n_cells());
  CHECK(finer.h_max() < m.h_max());
}

TEST_CASE("mesh generation is deterministic and round-trips") {
  const Mesh a = generate_cylinder_mesh(600, 2.0);
  const Mesh b = generate_cylinder_mesh(600, 2.0);
  CHECK(a == b);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != generate_cylinder_mesh(600, 3.0).fingerprint());

  romef::testing::TempDir dir("mesh");
  save_mesh(a, dir / "m.msh");
  const Mesh c = load_mesh(dir / "m.msh");
  CHECK(c == a);
  CHECK(c.fingerprint() == a.fingerprint());
  CHECK(mesh_from_string(mesh_to_string(a)) == a);
}

TEST_CASE("mesh parse errors carry line numbers") {
  const std::string good = mesh_to_string(generate_rectangle_mesh(1, 1, 1.0, 1.0));
  CHECK_NOTHROW(mesh_from_string(good));

  SUBCASE("bad header") {
    try {
      mesh_from_string("not-a-mesh 1\n");
      FAIL("no exception");
    } catch (const MeshParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("truncated") {
    CHECK_THROWS_AS(mesh_from_string(good.substr(0, good.size() / 2)), MeshParseError);
  }
  SUBCASE("bad number") {
    std::string bad = good;
    bad.replace(bad.find("1 0\n"), 3, "1 x");
    try {
      mesh_from_string(bad);
      FAIL("no exception");
    } catch (const MeshParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("unknown patch") {
    std::string bad = good;
    bad.replace(bad.find("0 outlet"), 8, "0 nowhere");
    CHECK_THROWS_AS(mesh_from_string(bad), MeshParseError);
  }
  CHECK_THROWS_AS(load_mesh("/nonexistent/file.msh"), MeshError);
}

TEST_CASE("invalid generator parameters") {
  CHECK_THROWS_AS(generate_cylinder_mesh(10, 2.0), MeshError);
  CHECK_THROWS_AS(generate_cylinder_mesh(2000, 0.5), MeshError);
  CHECK_THROWS_AS(generate_rectangle_mesh(0, 3, 1.0, 1.0), MeshError);
  CHECK_THROWS_AS(generate_rectangle_mesh(2, 2, 1.0, 1.0).patch("cylinder"), MeshError);
}
