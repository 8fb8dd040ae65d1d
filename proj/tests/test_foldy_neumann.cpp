#include "smallbody/foldy_neumann.hpp"

#include <doctest.h>

using namespace smallbody;

namespace {

BackgroundMedium free_medium(double k) {
  const Grid g(Box{Vec3::Constant(-0.5), Vec3::Constant(0.5)}, Eigen::Array3i(4, 4, 4));
  return BackgroundMedium::homogeneous(k, Region::box(g.box().lo, g.box().hi), g);
}

Points one(const Vec3& x) {
  Points p(3, 1);
  p.col(0) = x;
  return p;
}

}  // namespace

TEST_CASE("single hard ball matches the Rayleigh pattern") {
  const double k = 1.0, a = 0.05;
  const auto m = free_medium(k);
  const ParticleCloud c = make_hard_cloud(one(Vec3::Zero()), a, ball_polarizability());
  const Vec3 alpha = Vec3::UnitZ();
  const HardSolveResult r = assemble_and_solve_hard(m, c, alpha);
  const DirectionSet dirs = lat_long_grid(8, 16);
  const FarField far = far_field_hard(r, m, c, dirs);
  for (Index b = 0; b < dirs.size(); ++b) {
    const double cosine = dirs.directions.col(b).dot(alpha);
    const double expected = k * k * a * a * a / 3.0 * (1.5 * cosine - 1.0);
    CHECK(std::abs(far.values(b) - expected) < 1e-14);
  }
  Points fb(3, 2);
  fb.col(0) = alpha;
  fb.col(1) = -alpha;
  const VectorXc v = far_field_hard(r, m, c, direction_list(fb)).values;
  CHECK((v(0) / v(1)).real() == doctest::Approx(-0.2));
}

TEST_CASE("two hard balls against a hand-built 8x8 system") {
  const double k = 1.5, a = 0.01;
  const auto m = free_medium(k);
  Points p(3, 2);
  p.col(0) = Vec3(-0.1, 0.02, 0.0);
  p.col(1) = Vec3(0.08, -0.05, 0.1);
  const Mat3 beta = Mat3(Eigen::Vector3d(-1.5, -1.0, -2.0).asDiagonal());
  const ParticleCloud c = make_hard_cloud(p, a, beta);
  const Vec3 alpha = Vec3(0, 1, 0);
  const auto r = assemble_and_solve_hard(m, c, alpha);

  const double V = 4 * kPi / 3 * a * a * a;
  MatrixXc A = MatrixXc::Identity(8, 8);
  VectorXc rhs(8);
  for (int j = 0; j < 2; ++j) {
    const Vec3 xj = p.col(j);
    const Complex e = std::exp(kI * k * alpha.dot(xj));
    rhs(4 * j) = e;
    rhs.segment(4 * j + 1, 3) = kI * k * alpha.cast<Complex>() * e;
    const int mm = 1 - j;
    const Vec3 xm = p.col(mm);
    const Complex G = free_kernel(xj, xm, k);
    const CVec3 gy = free_kernel_grad_y<double>(xj, xm, k);
    const CVec3 gx = free_kernel_grad_x<double>(xj, xm, k);
    const CMat3 H = free_kernel_hessian_xy<double>(xj, xm, k);
    const Complex s = V * (-k * k);
    const CMat3 D = -V * beta.cast<Complex>();
    A(4 * j, 4 * mm) -= G * s;
    A.block(4 * j, 4 * mm + 1, 1, 3) -= gy.transpose() * D;
    A.block(4 * j + 1, 4 * mm, 3, 1) -= gx * s;
    A.block(4 * j + 1, 4 * mm + 1, 3, 3) -= H * D;
  }
  const VectorXc sol = A.partialPivLu().solve(rhs);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(r.effective_values(j) - sol(4 * j)) < 1e-13);
    CHECK((r.effective_gradients.col(j) - sol.segment(4 * j + 1, 3)).norm() < 1e-13);
  }
}

TEST_CASE("dense and matrix-free hard solves agree") {
  const auto m = free_medium(2.0);
  Points p(3, 8);
  int i = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) p.col(i++) = Vec3(x, y, z) * 0.15;
  const ParticleCloud c = make_hard_cloud(p, 0.01, ball_polarizability());
  FoldyOptions iterative;
  iterative.dense_limit = 0;
  const auto rd = assemble_and_solve_hard(m, c, Vec3::UnitX());
  const auto ri = assemble_and_solve_hard(m, c, Vec3::UnitX(), iterative);
  CHECK((rd.charges - ri.charges).norm() < 1e-9 * rd.charges.norm());
  CHECK((rd.dipole_moments - ri.dipole_moments).norm() < 1e-9 * rd.dipole_moments.norm());
}

TEST_CASE("dipole to monopole ratio grows like 1/(kd) below kd = 1") {
  const double k = 1.0, a = 1e-3;
  const auto m = free_medium(k);
  std::vector<double> ratios;
  for (double d : {0.4, 0.2, 0.1, 0.05}) {
    Points p(3, 2);
    p.col(0) = Vec3(-d / 2, 0, 0);
    p.col(1) = Vec3(d / 2, 0, 0);
    const ParticleCloud c = make_hard_cloud(p, a, ball_polarizability());
    const auto r = assemble_and_solve_hard(m, c, Vec3::UnitX());
    // field of particle 0 at particle 1: monopole ~ k²a³/d, dipole ~ k a³/d²
    const double mono = std::abs(free_kernel(Vec3(p.col(1)), Vec3(p.col(0)), k) * r.charges(0));
    const double dip = std::abs(free_kernel_grad_y<double>(Vec3(p.col(1)), Vec3(p.col(0)), k).dot(r.dipole_moments.col(0)));
    ratios.push_back(dip / mono);
  }
  // ratio ∝ 1/d: halving d doubles it
  for (std::size_t i = 1; i < ratios.size(); ++i) CHECK(ratios[i] / ratios[i - 1] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("monopole and dipole parts sum to the scattered field") {
  const auto m = free_medium(2.0);
  Points p(3, 3);
  p << 0.0, 0.2, -0.2, 0.0, 0.1, 0.0, 0.0, 0.0, 0.15;
  const ParticleCloud c = make_hard_cloud(p, 0.01, ball_polarizability());
  const auto r = assemble_and_solve_hard(m, c, Vec3::UnitZ());
  const Points x = one(Vec3(0.4, 0.4, 0.4));
  const FieldParts parts = scattered_parts_hard(r, m, c, x);
  const Complex total = evaluate_field_hard(r, m, c, x).values(0) - incident_field(m, Vec3::UnitZ(), x).values(0);
  CHECK(std::abs(parts.monopole(0) + parts.dipole(0) - total) < 1e-15);
}
