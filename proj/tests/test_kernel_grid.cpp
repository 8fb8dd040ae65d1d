#include "smallbody/kernel.hpp"
#include "smallbody/volume.hpp"

#include <doctest.h>

#include <cmath>

using namespace smallbody;

namespace {

// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("unit cube inverse distance matches face quadrature") {
  // ∫_cube dV/r = 6 · (1/4) ∫∫_face dA / R, face at distance 1/2.
  std::vector<double> x, w;
  gauss_legendre(80, x, w);
  double face = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double y = 0.5 * x[i], z = 0.5 * x[j];
      face += 0.25 * w[i] * w[j] / std::sqrt(0.25 + y * y + z * z);
    }
  }
  CHECK(6.0 * 0.25 * face == doctest::Approx(kUnitCubeInverseDistance).epsilon(1e-12));
}

TEST_CASE("self cell integral scales with h squared and carries the k h^3 term") {
  const Complex c = cube_self_integral(0.1, 2.0);
  CHECK(c.real() == doctest::Approx(kUnitCubeInverseDistance * 0.01 / (4 * kPi)));
  CHECK(c.imag() == doctest::Approx(2.0 * 1e-3 / (4 * kPi)));
}

TEST_CASE("free kernel value, symmetry and coincident points") {
  const Vec3 x(0.1, -0.2, 0.3), y(-0.4, 0.5, 0.05);
  const double k = 1.7, r = (x - y).norm();
  CHECK(rel(free_kernel(x, y, k), std::exp(kI * k * r) / (4 * kPi * r)) < 1e-15);
  CHECK(free_kernel(x, y, k) == free_kernel(y, x, k));
  CHECK_THROWS_AS(free_kernel(x, x, k), SingularEvaluation);
}

TEST_CASE("kernel derivatives agree with central differences") {
  const Vec3 x(0.3, 0.1, -0.2), y(-0.1, 0.4, 0.25);
  const double k = 2.3, e = 1e-6;
  const CVec3 gy = free_kernel_grad_y<double>(x, y, k);
  const CMat3 H = free_kernel_hessian_xy<double>(x, y, k);
  for (int p = 0; p < 3; ++p) {
    const Vec3 dp = e * Vec3::Unit(p);
    const Complex fd = (free_kernel(x, Vec3(y + dp), k) - free_kernel(x, Vec3(y - dp), k)) / (2 * e);
    CHECK(std::abs(fd - gy(p)) < 1e-7 * std::abs(gy(p)) + 1e-9);
    const CVec3 col = (free_kernel_grad_y<double>(Vec3(x + dp), y, k) - free_kernel_grad_y<double>(Vec3(x - dp), y, k)) / (2 * e);
    for (int q = 0; q < 3; ++q) CHECK(std::abs(col(q) - H(p, q)) < 1e-6);
  }
  CHECK((free_kernel_grad_x<double>(x, y, k) + gy).norm() < 1e-16);
}

TEST_CASE("grid geometry and cell lookup") {
  const Grid g(Box{Vec3(-1, -1, -1), Vec3(1, 1, 1)}, Eigen::Array3i(4, 4, 4));
  CHECK(g.spacing() == 0.5);
  CHECK(g.size() == 64);
  CHECK((g.node(0, 0, 0) - Vec3(-0.75, -0.75, -0.75)).norm() < 1e-15);
  const Index n = g.index(1, 2, 3);
  CHECK((g.ijk(n) == Eigen::Array3i(1, 2, 3)).all());
  CHECK(*g.cell_of(Vec3(-0.6, 0.1, 0.9)) == g.index(0, 2, 3));
  CHECK_FALSE(g.cell_of(Vec3(1.5, 0, 0)).has_value());
  CHECK(g.coincident_node(g.node(n)).value() == n);
  CHECK_THROWS_AS(Grid(Box{Vec3::Zero(), Vec3(1, 2, 1)}, Eigen::Array3i(2, 2, 2)), SchemaError);

  const Grid s = Grid::with_spacing(Box{Vec3::Zero(), Vec3(1, 0.6, 0.3)}, 0.25);
  CHECK((s.dims() == Eigen::Array3i(4, 3, 2)).all());
  CHECK(s.box().center().isApprox(Vec3(0.5, 0.3, 0.15)));
}

TEST_CASE("finite differences are exact on quadratics away from the boundary") {
  const Grid g(Box{Vec3::Zero(), Vec3::Ones()}, Eigen::Array3i(8, 8, 8));
  VectorXc u(g.size());
  for (Index n = 0; n < g.size(); ++n) {
    const Vec3 x = g.node(n);
    u(n) = Complex(x.x() * x.x() + 2 * x.y() * x.z(), x.z() * x.z());
  }
  const VectorXc lap = fd_laplacian(g, u);
  const Eigen::MatrixX3cd grad = fd_gradient(g, u);
  const Index c = g.index(3, 4, 5);
  const Vec3 x = g.node(c);
  CHECK(std::abs(lap(c) - Complex(2.0, 2.0)) < 1e-10);
  CHECK(std::abs(grad(c, 0) - 2 * x.x()) < 1e-12);
  CHECK(std::abs(grad(c, 1) - 2 * x.z()) < 1e-12);
  CHECK(std::abs(grad(c, 2) - Complex(2 * x.y(), 2 * x.z())) < 1e-12);
  Eigen::MatrixX3cd flux(g.size(), 3);
  for (Index n = 0; n < g.size(); ++n) flux.row(n) = Eigen::RowVector3cd(g.node(n).x(), 2 * g.node(n).y(), 0.0);
  CHECK(std::abs(fd_divergence(g, flux)(c) - 3.0) < 1e-12);
}

TEST_CASE("trilinear interpolation reproduces linear fields") {
  const Grid g(Box{Vec3::Zero(), Vec3::Ones()}, Eigen::Array3i(5, 5, 5));
  VectorXc u(g.size());
  for (Index n = 0; n < g.size(); ++n) u(n) = g.node(n).dot(Vec3(1, -2, 3)) + kI;
  Points p(3, 2);
  p << 0.31, 0.5, 0.27, 0.6, 0.45, 0.7;
  const VectorXc v = interpolate_trilinear(g, u, p);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(v(i) - (p.col(i).dot(Vec3(1, -2, 3)) + kI)) < 1e-13);
  Points out(3, 1);
  out << 2, 0, 0;
  CHECK_THROWS(interpolate_trilinear(g, u, out));
}

TEST_CASE("collar test sees nonzero boundary values") {
  const Grid g(Box{Vec3::Zero(), Vec3::Ones()}, Eigen::Array3i(6, 6, 6));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
  f(g.index(3, 3, 3)) = 1.0;
  CHECK(vanishes_on_collar(g, f, 2));
  f(g.index(1, 3, 3)) = 1.0;
  CHECK_FALSE(vanishes_on_collar(g, f, 2));
  CHECK(vanishes_on_collar(g, f, 1));
}

TEST_CASE("volume kernel apply matches its dense matrix") {
  const VolumeKernel K(Grid(Box{Vec3::Zero(), Vec3(0.8, 0.6, 1.0)}, Eigen::Array3i(4, 3, 5)), 1.3);
  const Index n = K.grid().size();
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[std::size_t(i)] = i;
  const MatrixXc A = K.dense(all, all);
  VectorXc v = VectorXc::Random(n);
  CHECK((K.apply(v) - A * v).norm() < 1e-12 * (A * v).norm());
  CHECK((A - A.transpose()).norm() < 1e-14 * A.norm());
  const double h3 = K.grid().cell_volume();
  CHECK(std::abs(A(0, 0) - cube_self_integral(K.grid().spacing(), 1.3)) < 1e-15);
  CHECK(std::abs(A(1, 0) - free_kernel(K.grid().node(1), K.grid().node(0), 1.3) * h3) < 1e-15);
}
