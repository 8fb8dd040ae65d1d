#include "smallbody/designer.hpp"

#include <doctest.h>

#include <random>

using namespace smallbody;

namespace {

BackgroundMedium box_medium(double side, int n, double k) {
  const Grid g(Box{Vec3::Zero(), Vec3::Constant(side)}, Eigen::Array3i(n, n, n));
  return BackgroundMedium::homogeneous(k, Region::box(g.box().lo, g.box().hi), g);
}

Complex recipe(Complex h, double N, const ShapeConstants& s = {}) { return s.impedance_factor() * N * h / (1.0 + h); }

}  // namespace

TEST_CASE("branch policy picks the documented (h, N)") {
  const double kappa = 4 * kPi;
  VectorXc p(5);
  p << Complex(2.0, -1.0), 3.0, -0.7, 0.0, Complex(-1.0, -2.0);
  const HNChoice c = choose_h_N(p);
  CHECK(branch_letter(c.branches[0]) == 'A');
  CHECK(std::abs(c.h(0) - Complex(0.0, -2.0)) < 1e-15);
  CHECK(c.N(0) == doctest::Approx(5.0 / (kappa * 2.0)));
  CHECK(branch_letter(c.branches[1]) == 'B');
  CHECK(c.h(1) == Complex(1.0));
  CHECK(c.N(1) == doctest::Approx(6.0 / kappa));
  CHECK(branch_letter(c.branches[2]) == 'C');
  CHECK(c.h(2) == Complex(-0.5));
  CHECK(c.N(2) == doctest::Approx(0.7 / kappa));
  CHECK(branch_letter(c.branches[3]) == 'D');
  CHECK(c.N(3) == 0.0);
  CHECK(branch_letter(c.branches[4]) == 'E');
  CHECK(c.extrapolated);
  CHECK(c.h(4).real() == -0.5);
  for (Index i = 0; i < p.size(); ++i) {
    CHECK(c.h(i).imag() <= 0.0);
    CHECK(c.N(i) >= 0.0);
    if (c.N(i) > 0) CHECK(std::abs(recipe(c.h(i), c.N(i)) - p(i)) <= 1e-12 * std::abs(p(i)));
  }
  CHECK(c.max_round_trip_error <= 1e-12);
}

TEST_CASE("randomized admissible potentials round trip") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const ShapeConstants shape{3.0, 40.0, 1.5};
  VectorXc p(500);
  for (Index i = 0; i < p.size(); ++i) p(i) = Complex(u(rng), -std::abs(u(rng)) * (i % 3 == 0 ? 0.0 : 1.0));
  const HNChoice c = choose_h_N(p, shape);
  for (Index i = 0; i < p.size(); ++i) {
    CHECK(std::abs(recipe(c.h(i), c.N(i), shape) - p(i)) <= 1e-12 * std::abs(p(i)));
    CHECK(c.h(i).imag() <= 0.0);
    CHECK(c.N(i) >= 0.0);
  }
}

TEST_CASE("nearly real lossy potentials round trip") {
  VectorXc p(4);
  p << Complex(-2.0, -1e-9), Complex(-0.3, -1e-14), Complex(-7.0, -3e-6), Complex(-1e3, -1e-4);
  const HNChoice c = choose_h_N(p);
  for (Index i = 0; i < p.size(); ++i) {
    CHECK(branch_letter(c.branches[std::size_t(i)]) == 'E');
    CHECK(c.h(i).imag() < 0.0);
    CHECK(std::abs(recipe(c.h(i), c.N(i)) - p(i)) <= 1e-12 * std::abs(p(i)));
  }
}

TEST_CASE("absorbing-gain targets are rejected") {
  VectorXc p(1);
  p << Complex(1.0, 0.5);
  CHECK_THROWS_AS(choose_h_N(p), InvariantViolation);
  const auto m = box_medium(1.0, 4, 1.0);
  CHECK_THROWS_AS(DesignSpec(m, VectorXc::Constant(m.grid().size(), Complex(1.2, -0.1)), 0.01), InvariantViolation);
  const BackgroundMedium ball(1.0, Region::ball(Vec3::Constant(0.5), 0.2), m.grid(), VectorXc::Ones(m.grid().size()));
  CHECK_THROWS_AS(DesignSpec(ball, VectorXc::Constant(m.grid().size(), 1.2), 0.01), InvariantViolation);
}

TEST_CASE("design for n = n0 is an empty cloud with a trivial verification") {
  const auto m = box_medium(1.0, 4, 1.0);
  const DesignSpec spec(m, VectorXc::Ones(m.grid().size()), 0.01);
  const DesignResult r = design(spec);
  CHECK(r.cloud.empty());
  CHECK(r.p.norm() == 0.0);
  const DesignVerification v = verify_design(r, spec, Vec3::UnitZ(), {0.02, 0.01}, far_probes(m.domain()));
  CHECK(v.study.exact);
  CHECK(v.success);
  CHECK(v.final_error <= 1e-13);
}

TEST_CASE("dense unit-impedance cloud feasibility numbers") {
  // N = 1e4 on cells of side 1e-2 with a = 1e-5 gives 1e3 particles per cell.
  const double k = 1.0, N = 1e4;
  const auto m = box_medium(0.02, 4, k);
  const double p = 4 * kPi * N / 2.0;  // branch B: N = 2p/κ
  LatticeOptions lattice;
  lattice.cell_nodes = 2;
  const DesignSpec spec(m, VectorXc::Constant(m.grid().size(), 1.0 - p / (k * k)), 1e-5, {}, lattice);
  const DesignResult r = design(spec);
  CHECK(branch_letter(r.branches[0]) == 'B');
  CHECK(r.N(0) == doctest::Approx(N).epsilon(1e-12));
  CHECK(r.feasibility.cell_size == doctest::Approx(1e-2));
  CHECK(r.feasibility.max_cell_count == 1000);
  CHECK(r.feasibility.min_cell_spacing_over_a == doctest::Approx(100.0));
  CHECK(r.feasibility.spacing_over_a == doctest::Approx(100.0));
  CHECK(r.feasibility.volume_fraction == doctest::Approx(4.18879e-6).epsilon(1e-5));
}

TEST_CASE("branch C design realizes the target") {
  const double k = 2.0;
  const auto m = box_medium(1.0, 8, k);
  VectorXc n = VectorXc::Ones(m.grid().size());
  for (Index i = 0; i < n.size(); ++i) {
    if ((m.grid().node(i) - Vec3::Constant(0.5)).norm() < 0.25) n(i) = 1.2;
  }
  const DesignSpec spec(m, n, 2e-4);
  const DesignResult r = design(spec);
  for (Index i = 0; i < n.size(); ++i) {
    if (n(i) != Complex(1.0)) {
      CHECK(branch_letter(r.branches[std::size_t(i)]) == 'C');
      CHECK(std::abs(recipe(r.h(i), r.N(i)) - k * k * (1.0 - 1.2)) < 1e-12 * 0.8);
    } else {
      CHECK(branch_letter(r.branches[std::size_t(i)]) == 'D');
    }
  }
  CHECK(r.cloud.size() > 0);
  CHECK(validate_cloud(r.cloud, m).ok());
  CHECK_FALSE(r.feasibility.extrapolated);
}
