#include "smallbody/volume.hpp"

#include <doctest.h>

using namespace smallbody;

namespace {

MatrixXc well_conditioned(Index n, unsigned seed) {
  std::srand(seed);
  MatrixXc A = MatrixXc::Random(n, n) * (0.5 / std::sqrt(double(n)));
  A.diagonal().array() += Complex(1.0, 0.3);
  return A;
}

}  // namespace

TEST_CASE("gmres and dense LU agree on a well conditioned system") {
  const Index n = 120;
  const MatrixXc A = well_conditioned(n, 7);
  const VectorXc b = VectorXc::Random(n);
  SolverOptions o;
  o.restart = 20;
  SolveStats gs, ds;
  const VectorXc xg = gmres([&](const VectorXc& v) { return VectorXc(A * v); }, b, o, &gs);
  const VectorXc xd = dense_solve(A, b, o, &ds);
  CHECK(gs.residual <= 1e-10);
  CHECK_FALSE(gs.direct);
  CHECK(gs.iterations > 0);
  CHECK(ds.direct);
  CHECK((xg - xd).norm() < 1e-8 * xd.norm());
  CHECK((A * xd - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("solve_system switches on the dense limit") {
  const Index n = 40;
  const MatrixXc A = well_conditioned(n, 3);
  const VectorXc b = VectorXc::Ones(n);
  int assembled = 0, applied = 0;
  const auto assemble = [&] { ++assembled; return A; };
  const auto apply = [&](const VectorXc& v) { ++applied; return VectorXc(A * v); };
  SolverOptions o;
  o.dense_limit = n;
  SolveStats s;
  solve_system(n, assemble, apply, b, o, &s);
  CHECK(assembled == 1);
  CHECK(s.direct);
  o.dense_limit = n - 1;
  solve_system(n, assemble, apply, b, o, &s);
  CHECK(assembled == 1);
  CHECK(applied > 0);
  CHECK_FALSE(s.direct);
}

TEST_CASE("gmres reports failure with the achieved residual") {
  const Index n = 60;
  MatrixXc A = MatrixXc::Zero(n, n);
  for (Index i = 0; i < n; ++i) A(i, (i + 1) % n) = 1.0;  // cyclic shift stalls short Krylov spaces
  SolverOptions o;
  o.restart = 5;
  o.max_iterations = 10;
  CHECK_THROWS_AS(gmres([&](const VectorXc& v) { return VectorXc(A * v); }, VectorXc::Unit(n, 0), o), SolverFailure);
}

TEST_CASE("zero right-hand side gives zero solution") {
  const MatrixXc A = well_conditioned(10, 1);
  SolveStats s;
  const VectorXc x = gmres([&](const VectorXc& v) { return VectorXc(A * v); }, VectorXc::Zero(10), {}, &s);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("Lippmann-Schwinger solve satisfies the discrete equation") {
  const Grid g(Box{Vec3::Zero(), Vec3::Ones()}, Eigen::Array3i(5, 5, 5));
  VectorXc q = VectorXc::Zero(g.size());
  for (Index n = 0; n < g.size(); ++n) {
    if ((g.node(n) - Vec3(0.5, 0.5, 0.5)).norm() < 0.35) q(n) = Complex(3.0, -0.5);
  }
  const double k = 2.0;
  VectorXc f(g.size());
  for (Index n = 0; n < g.size(); ++n) f(n) = std::exp(kI * k * g.node(n).z());
  for (Index limit : {Index(2000), Index(0)}) {
    SolverOptions o;
    o.dense_limit = limit;
    const LippmannSchwinger ls(g, k, q, o);
    SolveStats s;
    const VectorXc u = ls.solve(f, &s);
    const VectorXc lhs = u + ls.kernel().apply(q.cwiseProduct(u));
    CHECK((lhs - f).norm() < 1e-9 * f.norm());
    CHECK(s.direct == (limit > 0));
  }
}
