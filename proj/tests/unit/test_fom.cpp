#include <doctest.h>

#include <cmath>
#include <limits>

#include "../common/flow_cases.hpp"
#include "romef/errors.hpp"
#include "romef/fom.hpp"
#include "romef/run_fom.hpp"

using namespace romef;

namespace {

Eigen::RowVectorXd row2(double a, double b) {
  Eigen::RowVectorXd r(2);
  r << a, b;
  return r;
}

/// All-Dirichlet velocity on a rectangle, q-bar and q pinned on the right side.
FlowBoundary dirichlet_box(const Mesh& mesh, std::function<Eigen::RowVectorXd(const Vec2&, double)> u) {
  FlowBoundary fb{BoundarySet(mesh, 2), BoundarySet(mesh, 1), BoundarySet()};
  for (const auto& p : mesh.patches()) fb.velocity.set(mesh, p.name, PatchBc::fixed_value(u));
  fb.pressure.set(mesh, "right", PatchBc::homogeneous(1));
  return fb;
}

}  // namespace

TEST_CASE("physics validation") {
  PhysicsConfig ph;
  CHECK(ph.n_steps() == 20000);
  CHECK(ph.mu_bar() == doctest::Approx(0.0032 * 0.0032 / 4e-4));
  CHECK_NOTHROW(ph.validate());
  ph.dt = 3e-4 * 1.1;
  CHECK_THROWS_AS(ph.validate(), ConfigError);
  ph = PhysicsConfig{};
  ph.mu = 0.0;
  CHECK_THROWS_AS(ph.validate(), ConfigError);
  ph = PhysicsConfig{};
  ph.alpha = -1.0;
  CHECK_THROWS_AS(ph.validate(), ConfigError);
}

TEST_CASE("rest state with a vanishing inlet stays at rest") {
  const Mesh mesh = generate_cylinder_mesh(400, 2.0);
  PhysicsConfig ph;
  ph.dt = 1e-3;
  ph.T = 5e-3;
  EvolveFilterSolver solver(mesh, ph, SolverControls{}, channel_flow_boundary(mesh, [](double) { return 0.0; }, 0.41));
  for (int k = 0; k < ph.n_steps(); ++k) solver.step();
  const FomState& s = solver.state();
  CHECK(s.v.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.q.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.u.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.qbar.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.t == doctest::Approx(5e-3));
  CHECK(s.step == 5);
}

TEST_CASE("steady Poiseuille channel") {
  const auto r = romef::testing::run_poiseuille();
  MESSAGE("centerline " << r.centerline << " (expected " << r.expected << "), dp/dx " << r.dpdx << " (expected "
                        << r.dpdx_expected << ")");
  CHECK(std::abs(r.centerline - r.expected) <= 0.01 * r.expected);
  CHECK(std::abs(r.dpdx - r.dpdx_expected) <= 0.02 * std::abs(r.dpdx_expected));
  CHECK(r.continuity <= 1e-10);
  CHECK(r.max_change <= 1e-8);
}

TEST_CASE("Taylor-Green vortex converges at second order") {
  const auto a = romef::testing::run_taylor_green(32, 0.01);
  const auto b = romef::testing::run_taylor_green(64, 0.005);
  const double order = std::log2(a.ev / b.ev);
  MESSAGE("E_v " << a.ev << " -> " << b.ev << ", order " << order);
  CHECK(order >= 1.7);
  CHECK(order <= 2.2);
  CHECK(b.ev < 1e-3);
  // identity filter
  CHECK(a.eu == doctest::Approx(a.ev).epsilon(0.05));
}

TEST_CASE("filter of fields in its kernel") {
  const Mesh mesh = generate_rectangle_mesh(10, 6, 1.0, 0.6, {"left", "right", "bottom", "top"});
  PhysicsConfig ph;
  ph.alpha = 0.05;
  ph.dt = 1e-3;
  SUBCASE("constant velocity") {
    EvolveFilterSolver solver(mesh, ph, SolverControls{},
                              dirichlet_box(mesh, [](const Vec2&, double) { return row2(0.7, -0.3); }));
    Field v = Field::zeros(mesh, 2);
    v.c.col(0).setConstant(0.7);
    v.c.col(1).setConstant(-0.3);
    v.b.col(0).setConstant(0.7);
    v.b.col(1).setConstant(-0.3);
    const auto [u, qbar] = solver.filter_step(v, ph.dt);
    CHECK((u.c - v.c).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(qbar.c.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("filter transfer function of a shear wave") {
  // v = (0, sin k x) is divergence free; the filter returns (0, sin k x / (1 + alpha^2 k^2))
  const double k = 4.0 * M_PI, alpha = 0.05, gain = 1.0 / (1.0 + alpha * alpha * k * k);
  const Mesh mesh = generate_rectangle_mesh(96, 6, 1.0, 0.25, {"left", "right", "bottom", "top"});
  PhysicsConfig ph;
  ph.alpha = alpha;
  ph.dt = 1e-3;
  EvolveFilterSolver solver(mesh, ph, SolverControls{},
                            dirichlet_box(mesh, [&](const Vec2& x, double) { return row2(0.0, gain * std::sin(k * x.x())); }));
  Field v = Field::zeros(mesh, 2);
  for (int c = 0; c < mesh.n_cells(); ++c) v.c(c, 1) = std::sin(k * mesh.centroid(c).x());
  for (int i = mesh.n_internal_faces(); i < mesh.n_faces(); ++i)
    v.b(i - mesh.n_internal_faces(), 1) = std::sin(k * mesh.face_centroid(i).x());
  const auto [u, qbar] = solver.filter_step(v, ph.dt);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    num += u.c(c, 1) * v.c(c, 1) * mesh.area(c);
    den += v.c(c, 1) * v.c(c, 1) * mesh.area(c);
  }
  const double measured = num / den;
  MESSAGE("gain " << measured << " (continuous " << gain << ")");
  CHECK(measured == doctest::Approx(gain).epsilon(0.01));
  // SIMPLEC stops at a relative residual, not at machine precision
  CHECK(u.c.col(0).cwiseAbs().maxCoeff() <= 1e-3 * gain);
}

TEST_CASE("snapshot collection") {
  const Mesh mesh = generate_rectangle_mesh(22, 6, 2.2, 0.41);
  PhysicsConfig ph;
  ph.dt = 0.01;
  ph.T = 0.2;
  auto make = [&]() {
    return EvolveFilterSolver(mesh, ph, SolverControls{}, channel_flow_boundary(mesh, [](double t) { return t; }, 0.41));
  };
  AeroReference aero;
  aero.patch = "walls";
  SUBCASE("samples at every stride") {
    auto s1 = make();
    const FomRunResult a = run_fom(s1, sample_stride(0.05, ph.dt), aero);
    CHECK(a.v.cols() == 4);
    CHECK(a.v.times.front() == doctest::Approx(0.05));
    CHECK(a.v.times.back() == doctest::Approx(0.2));
    CHECK(a.history.size() == 21);
    CHECK(a.qbar.cols() == 4);
    CHECK(a.v.data.allFinite());
    auto s2 = make();
    const FomRunResult b = run_fom(s2, 5, aero);
    CHECK(a.v.data == b.v.data);
    CHECK(a.q.data == b.q.data);
    CHECK(a.u.data == b.u.data);
  }
  SUBCASE("empty schedule") {
    ph.T = 0.0;
    auto s = make();
    const FomRunResult r = run_fom(s, 5, aero);
    CHECK(r.v.cols() == 0);
    CHECK(r.history.size() == 1);
  }
  CHECK_THROWS_AS(sample_stride(0.055, 0.01), ConfigError);
  CHECK(sample_stride(0.1, 4e-4) == 250);
}

TEST_CASE("non-finite state is reported") {
  const Mesh mesh = generate_rectangle_mesh(8, 4, 2.2, 0.41);
  PhysicsConfig ph;
  ph.dt = 0.01;
  ph.T = 0.1;
  EvolveFilterSolver solver(mesh, ph, SolverControls{}, channel_flow_boundary(mesh, [](double) { return 1.0; }, 0.41));
  FomState st = solver.state();
  st.v.c(3, 0) = std::numeric_limits<double>::quiet_NaN();
  solver.set_state(st);
  CHECK_THROWS_AS(solver.step(), NumericalError);
}

TEST_CASE("channel boundary conditions") {
  const Mesh mesh = generate_cylinder_mesh(400, 2.0);
  CHECK(benchmark_inlet_law(4.0) == doctest::Approx(1.0));
  CHECK(benchmark_inlet_law(0.0) == 0.0);
  CHECK(parabolic_profile(0.205, 0.41) == doctest::Approx(1.5));
  const FlowBoundary fb = channel_flow_boundary(mesh, benchmark_inlet_law, 0.41);
  Field v = Field::zeros(mesh, 2);
  fb.velocity.apply(mesh, v, 4.0);
  const Patch& in = mesh.patch("inlet");
  // unit mean at the peak; the midpoint rule overestimates each face by h^3 / (2 H^2)
  double flow = 0.0, expected = 0.41;
  for (int f = in.start; f < in.start + in.size; ++f) {
    const double h = mesh.face_mag(f);
    flow += v.b(f - mesh.n_internal_faces(), 0) * h;
    expected += h * h * h / (2.0 * 0.41 * 0.41);
  }
  CHECK(flow == doctest::Approx(expected).epsilon(1e-12));
  const Patch& cyl = mesh.patch("cylinder");
  for (int f = cyl.start; f < cyl.start + cyl.size; ++f) CHECK(v.b.row(f - mesh.n_internal_faces()).norm() == 0.0);
}
