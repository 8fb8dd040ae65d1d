#include "smallbody/medium.hpp"

#include <doctest.h>

using namespace smallbody;

namespace {

Grid unit_grid(int n) { return Grid(Box{Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)}, Eigen::Array3i(n, n, n)); }

BackgroundMedium bump(double k, int n = 6) {
  const Grid g = unit_grid(n);
  const Region D = Region::ball(Vec3::Zero(), 0.45);
  VectorXc n0 = VectorXc::Ones(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    if (g.node(i).norm() < 0.3) n0(i) = Complex(1.5, 0.1);
  }
  return BackgroundMedium(k, D, g, n0);
}

}  // namespace

TEST_CASE("homogeneous medium uses the free kernel") {
  const Grid g = unit_grid(4);
  const auto m = BackgroundMedium::homogeneous(1.2, Region::box(g.box().lo, g.box().hi), g);
  CHECK(m.is_free());
  const Vec3 x(0.1, 0.2, 0.3), y(-0.3, 0.0, 0.1);
  CHECK(background_green(m, x, y) == free_kernel(x, y, 1.2));
  Points p(3, 1);
  p.col(0) = x;
  const Vec3 alpha = Vec3(1, 2, 2) / 3.0;
  CHECK(std::abs(incident_field(m, alpha, p).values(0) - std::exp(kI * 1.2 * alpha.dot(x))) < 1e-15);
}

TEST_CASE("medium invariants") {
  const Grid g = unit_grid(4);
  const Region D = Region::ball(Vec3::Zero(), 0.2);
  VectorXc n0 = VectorXc::Ones(g.size());
  n0(0) = 1.1;  // corner node, outside D
  CHECK_THROWS_AS(BackgroundMedium(1.0, D, g, n0), InvariantViolation);
  n0.setOnes();
  n0(g.index(1, 1, 1)) = Complex(1.1, -0.1);  // Im n0 < 0 gives Im q0 > 0
  CHECK_THROWS_AS(BackgroundMedium(1.0, Region::box(g.box().lo, g.box().hi), g, n0), InvariantViolation);
  CHECK_THROWS_AS(BackgroundMedium(0.0, D, g, VectorXc::Ones(g.size())), SchemaError);
  Points p(3, 1);
  p.col(0) = Vec3::Zero();
  CHECK_THROWS_AS(incident_field(BackgroundMedium::homogeneous(1.0, D, g), Vec3(1, 1, 0), p), SchemaError);
}

TEST_CASE("q0 is k^2(1-n0) and exactly zero where n0 = 1") {
  const auto m = bump(2.0);
  for (Index i = 0; i < m.grid().size(); ++i) {
    if (m.n0()(i) == Complex(1.0)) {
      CHECK(m.q0()(i) == Complex(0.0));
    } else {
      CHECK(std::abs(m.q0()(i) - 4.0 * (1.0 - m.n0()(i))) < 1e-15);
      CHECK(m.q0()(i).imag() <= 0.0);
    }
  }
  CHECK_FALSE(m.is_free());
}

TEST_CASE("background Green's function is reciprocal") {
  const auto m = bump(2.0);
  const Vec3 x(0.05, -0.1, 0.2), y(-0.15, 0.12, -0.07);
  const Complex gxy = background_green(m, x, y), gyx = background_green(m, y, x);
  CHECK(std::abs(gxy - gyx) < 1e-9 * std::abs(gxy));
  CHECK(std::abs(gxy - free_kernel(x, y, 2.0)) > 1e-4 * std::abs(gxy));
}

TEST_CASE("background Green's function derivatives match differences") {
  const auto m = bump(1.5);
  const Vec3 x(0.21, -0.13, 0.02), y(-0.11, 0.17, -0.09);
  const double e = 1e-5;
  Points src(3, 3);
  src.col(0) = y;
  for (int p = 0; p < 3; ++p) {
    Points s(3, 2);
    s.col(0) = y + e * Vec3::Unit(p);
    s.col(1) = y - e * Vec3::Unit(p);
    const GreenCoupling shifted(m, s, true);
    src.col(0) = y;
    const GreenCoupling G(m, src.leftCols(1), true);
    const Complex fd_y = (shifted.value(x, 0) - shifted.value(x, 1)) / (2 * e);
    CHECK(std::abs(fd_y - G.grad_y(x, 0)(p)) < 1e-6 * std::abs(G.grad_y(x, 0)(p)) + 1e-8);
    const Vec3 dx = e * Vec3::Unit(p);
    const Complex fd_x = (G.value(Vec3(x + dx), 0) - G.value(Vec3(x - dx), 0)) / (2 * e);
    CHECK(std::abs(fd_x - G.grad_x(x, 0)(p)) < 1e-6 * std::abs(G.grad_x(x, 0)(p)) + 1e-8);
    const CVec3 fd_h = (G.grad_y(Vec3(x + dx), 0) - G.grad_y(Vec3(x - dx), 0)) / (2 * e);
    for (int q = 0; q < 3; ++q) CHECK(std::abs(fd_h(q) - G.hessian_xy(x, 0)(p, q)) < 1e-5);
  }
}

TEST_CASE("off-grid incident field agrees with the grid solution at nodes") {
  const auto m = bump(2.0);
  const Vec3 alpha = Vec3(0, 0.6, 0.8);
  const VectorXc grid_u0 = m.incident_on_grid(alpha);
  const Points nodes = m.grid().nodes();
  const ComplexField u0 = incident_field(m, alpha, nodes);
  CHECK((u0.values - grid_u0).norm() < 1e-12 * grid_u0.norm());
  // u0 solves u0 + K(q0 u0) = plane wave.
  VectorXc plane(nodes.cols());
  for (Index i = 0; i < nodes.cols(); ++i) plane(i) = std::exp(kI * 2.0 * alpha.dot(nodes.col(i)));
  const VectorXc lhs = grid_u0 + m.background_solver().kernel().apply(m.q0().cwiseProduct(grid_u0));
  CHECK((lhs - plane).norm() < 1e-9 * plane.norm());
}

TEST_CASE("incident gradient matches differences of the incident field") {
  const auto m = bump(2.0);
  const Vec3 alpha = Vec3(0.6, 0, 0.8);
  Points p(3, 1);
  p.col(0) = Vec3(0.7, 0.2, -0.1);
  const CPoints grad = incident_gradient(m, alpha, p);
  const double e = 1e-5;
  for (int q = 0; q < 3; ++q) {
    Points s(3, 2);
    s.col(0) = p.col(0) + e * Vec3::Unit(q);
    s.col(1) = p.col(0) - e * Vec3::Unit(q);
    const VectorXc v = incident_field(m, alpha, s).values;
    CHECK(std::abs((v(0) - v(1)) / (2 * e) - grad(q, 0)) < 1e-7);
  }
}

TEST_CASE("lemma bound ratio is bounded for a small sample") {
  const Grid g = unit_grid(4);
  const auto m = BackgroundMedium::homogeneous(1.0, Region::box(g.box().lo, g.box().hi), g);
  const LemmaBoundsReport r = lemma_bounds_check(m, 1e-3, 1e-1, 1000);
  CHECK(r.samples == 1000);
  CHECK(r.max_g_ratio <= 5.0);
  CHECK(r.max_g_ratio > 0.0);
  CHECK(r.max_green_ratio == r.max_g_ratio);
  CHECK_THROWS_AS(lemma_bounds_check(m, 1e-2, 5e-2, 10), InvariantViolation);
}
