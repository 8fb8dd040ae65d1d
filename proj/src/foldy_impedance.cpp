#include "smallbody/foldy_impedance.hpp"

#include <sstream>

namespace smallbody {

Complex charge_from_effective_field(Complex zeta, double a, const ShapeConstants& shape, Complex u_e) {
  const double S = shape.surface(a);
  const Complex denom = 1.0 + zeta * shape.j_integral(a) / (4.0 * kPi * S);
  if (std::abs(denom) < 1e-12) throw InvariantViolation("charge denominator vanishes (h = -1)");
  return -zeta * S * u_e / denom;
}

VectorXc impedance_coupling(const ParticleCloud& cloud) {
  if (cloud.kind != ParticleKind::Impedance) throw SchemaError("impedance solve requires an impedance cloud");
  if (cloud.zeta.size() != cloud.size()) throw SchemaError("impedance count does not match particle count");
  VectorXc c(cloud.size());
  for (Index m = 0; m < cloud.size(); ++m) c(m) = -charge_from_effective_field(cloud.zeta(m), cloud.a, cloud.shape, 1.0);
  return c;
}

ImpedanceSolveResult assemble_and_solve(const BackgroundMedium& medium, const ParticleCloud& cloud,
                                        const Vec3& alpha, const FoldyOptions& options) {
  require_unit(alpha, "assemble_and_solve");
  require_valid(cloud, medium);
  ImpedanceSolveResult result;
  result.incident_direction = alpha;
  result.coupling = impedance_coupling(cloud);
  const Index M = cloud.size();
  const VectorXc rhs = incident_field(medium, alpha, cloud.centers).values;
  if (M == 0) {
    result.effective_values = rhs;
    result.charges = rhs;
    return result;
  }
  const VectorXc& c = result.coupling;
  const double k = medium.k();
  const Points& x = cloud.centers;

  std::optional<GreenCoupling> green;
  if (!medium.is_free()) green.emplace(medium, x);
  const auto G = [&](Index j, Index m) {
    return green ? green->value(x.col(j), m) : free_kernel(x.col(j), x.col(m), k);
  };

  const auto assemble = [&]() {
    MatrixXc A(M, M);
#pragma omp parallel for schedule(dynamic, 16)
    for (Index m = 0; m < M; ++m) {
      for (Index j = 0; j < M; ++j) A(j, m) = j == m ? Complex(1.0) : G(j, m) * c(m);
    }
    return A;
  };
  const LinearOperator apply = [&](const VectorXc& v) {
    const VectorXc cv = c.cwiseProduct(v);
    VectorXc out = v;
#pragma omp parallel for schedule(dynamic, 16)
    for (Index j = 0; j < M; ++j) {
      Complex acc = 0.0;
      for (Index m = 0; m < M; ++m) {
        if (m != j) acc += G(j, m) * cv(m);
      }
      out(j) += acc;
    }
    return out;
  };
  result.effective_values = solve_system(M, assemble, apply, rhs, options.solver(), &result.stats);
  result.charges = -c.cwiseProduct(result.effective_values);
  return result;
}

void require_far_from_particles(const ParticleCloud& cloud, const Points& points) {
  for (Index p = 0; p < points.cols(); ++p) {
    for (Index m = 0; m < cloud.size(); ++m) {
      const double r = (points.col(p) - cloud.centers.col(m)).norm();
      if (r < cloud.d) {
        std::ostringstream msg;
        msg << "evaluation point " << p << " lies within d = " << cloud.d << " of particle " << m
            << " (distance " << r << ")";
        throw InvariantViolation(msg.str());
      }
    }
  }
}

ComplexField evaluate_field(const ImpedanceSolveResult& result, const BackgroundMedium& medium,
                            const ParticleCloud& cloud, const Points& points) {
  require_far_from_particles(cloud, points);
  ComplexField out = incident_field(medium, result.incident_direction, points);
  if (cloud.empty()) return out;
  std::optional<GreenCoupling> green;
  if (!medium.is_free()) green.emplace(medium, cloud.centers);
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < points.cols(); ++p) {
    Complex acc = 0.0;
    for (Index m = 0; m < cloud.size(); ++m) {
      const Complex G = green ? green->value(points.col(p), m)
                              : free_kernel(points.col(p), cloud.centers.col(m), medium.k());
      acc += G * result.charges(m);
    }
    out.values(p) += acc;
  }
  return out;
}

FarField far_field(const ImpedanceSolveResult& result, const BackgroundMedium& medium, const ParticleCloud& cloud,
                   const DirectionSet& directions) {
  FarField far;
  far.incident_direction = result.incident_direction;
  far.directions = directions;
  far.background = background_amplitude(medium, result.incident_direction, directions);
  far.values = far.background;
  for (Index b = 0; b < directions.size(); ++b) {
    const Vec3 beta = directions.directions.col(b);
    const VectorXc u0 = incident_field(medium, -beta, cloud.centers).values;
    far.values(b) += u0.cwiseProduct(result.charges).sum() / (4.0 * kPi);
  }
  return far;
}

}  // namespace smallbody
