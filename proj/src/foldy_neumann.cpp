#include "smallbody/foldy_neumann.hpp"

namespace smallbody {

HardSolveResult assemble_and_solve_hard(const BackgroundMedium& medium, const ParticleCloud& cloud,
                                        const Vec3& alpha, const FoldyOptions& options) {
  require_unit(alpha, "assemble_and_solve_hard");
  if (cloud.kind != ParticleKind::Hard) throw SchemaError("hard solve requires a hard-particle cloud");
  require_valid(cloud, medium);
  const Index M = cloud.size();
  const Points& x = cloud.centers;
  const double k = medium.k();
  const double V = cloud.shape.volume(cloud.a);

  HardSolveResult result;
  result.incident_direction = alpha;
  const VectorXc u0 = incident_field(medium, alpha, x).values;
  const CPoints du0 = incident_gradient(medium, alpha, x);

  // Per-particle maps from (u, ∇u) to (Q, P).
  VectorXc s(M);
  std::vector<CMat3> D(static_cast<std::size_t>(M));
  for (Index m = 0; m < M; ++m) {
    s(m) = V * (medium.q0_at(x.col(m)) - k * k);
    D[std::size_t(m)] = (-V * cloud.beta[std::size_t(m)]).cast<Complex>();
  }

  VectorXc rhs(4 * M);
  for (Index j = 0; j < M; ++j) {
    rhs(4 * j) = u0(j);
    rhs.segment<3>(4 * j + 1) = du0.col(j);
  }

  std::optional<GreenCoupling> green;
  if (!medium.is_free()) green.emplace(medium, x, true);
  // Block (j, m) maps (u_m, ∇u_m) to the field of particle m and its gradient at x_j.
  const auto block = [&](Index j, Index m) {
    Complex G;
    CVec3 gy, gx;
    CMat3 H;
    if (green) {
      G = green->value(x.col(j), m);
      gy = green->grad_y(x.col(j), m);
      gx = green->grad_x(x.col(j), m);
      H = green->hessian_xy(x.col(j), m);
    } else {
      G = free_kernel(x.col(j), x.col(m), k);
      gy = free_kernel_grad_y<double>(x.col(j), x.col(m), k);
      gx = -gy;
      H = free_kernel_hessian_xy<double>(x.col(j), x.col(m), k);
    }
    const CMat3& Dm = D[std::size_t(m)];
    Eigen::Matrix4cd B;
    B(0, 0) = G * s(m);
    B.block<1, 3>(0, 1) = gy.transpose() * Dm;
    B.block<3, 1>(1, 0) = gx * s(m);
    B.block<3, 3>(1, 1) = H * Dm;
    return B;
  };

  const Index n = 4 * M;
  const auto assemble = [&]() {
    MatrixXc A = MatrixXc::Identity(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (Index m = 0; m < M; ++m) {
      for (Index j = 0; j < M; ++j) {
        if (j != m) A.block<4, 4>(4 * j, 4 * m) = -block(j, m);
      }
    }
    return A;
  };
  const LinearOperator apply = [&](const VectorXc& v) {
    VectorXc out = v;
#pragma omp parallel for schedule(dynamic, 8)
    for (Index j = 0; j < M; ++j) {
      Eigen::Vector4cd acc = Eigen::Vector4cd::Zero();
      for (Index m = 0; m < M; ++m) {
        if (m != j) acc += block(j, m) * v.segment<4>(4 * m);
      }
      out.segment<4>(4 * j) -= acc;
    }
    return out;
  };
  const VectorXc sol = M == 0 ? VectorXc() : solve_system(n, assemble, apply, rhs, options.solver(), &result.stats);

  result.effective_values.resize(M);
  result.effective_gradients.resize(3, M);
  result.charges.resize(M);
  result.dipole_moments.resize(3, M);
  for (Index m = 0; m < M; ++m) {
    result.effective_values(m) = sol(4 * m);
    result.effective_gradients.col(m) = sol.segment<3>(4 * m + 1);
    result.charges(m) = s(m) * sol(4 * m);
    result.dipole_moments.col(m) = D[std::size_t(m)] * result.effective_gradients.col(m);
  }
  return result;
}

FieldParts scattered_parts_hard(const HardSolveResult& result, const BackgroundMedium& medium,
                                const ParticleCloud& cloud, const Points& points) {
  require_far_from_particles(cloud, points);
  FieldParts parts{VectorXc::Zero(points.cols()), VectorXc::Zero(points.cols())};
  if (cloud.empty()) return parts;
  std::optional<GreenCoupling> green;
  if (!medium.is_free()) green.emplace(medium, cloud.centers, true);
  const double k = medium.k();
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < points.cols(); ++p) {
    const Vec3 xp = points.col(p);
    Complex mono = 0.0, dip = 0.0;
    for (Index m = 0; m < cloud.size(); ++m) {
      const Complex G = green ? green->value(xp, m) : free_kernel(xp, cloud.centers.col(m), k);
      const CVec3 gy = green ? green->grad_y(xp, m) : free_kernel_grad_y<double>(xp, cloud.centers.col(m), k);
      mono += G * result.charges(m);
      dip += (gy.transpose() * result.dipole_moments.col(m))(0);
    }
    parts.monopole(p) = mono;
    parts.dipole(p) = dip;
  }
  return parts;
}

ComplexField evaluate_field_hard(const HardSolveResult& result, const BackgroundMedium& medium,
                                 const ParticleCloud& cloud, const Points& points) {
  const FieldParts parts = scattered_parts_hard(result, medium, cloud, points);
  ComplexField out = incident_field(medium, result.incident_direction, points);
  out.values += parts.monopole + parts.dipole;
  return out;
}

FarField far_field_hard(const HardSolveResult& result, const BackgroundMedium& medium, const ParticleCloud& cloud,
                        const DirectionSet& directions) {
  FarField far;
  far.incident_direction = result.incident_direction;
  far.directions = directions;
  far.background = background_amplitude(medium, result.incident_direction, directions);
  far.values = far.background;
  for (Index b = 0; b < directions.size(); ++b) {
    const Vec3 beta = directions.directions.col(b);
    const VectorXc u0 = incident_field(medium, -beta, cloud.centers).values;
    const CPoints du0 = incident_gradient(medium, -beta, cloud.centers);
    Complex acc = 0.0;
    for (Index m = 0; m < cloud.size(); ++m) {
      acc += u0(m) * result.charges(m) + (du0.col(m).transpose() * result.dipole_moments.col(m))(0);
    }
    far.values(b) += acc / (4.0 * kPi);
  }
  return far;
}

}  // namespace smallbody
