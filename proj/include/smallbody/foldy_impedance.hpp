#pragma once

#include "smallbody/far_field.hpp"
#include "smallbody/particles.hpp"

namespace smallbody {

struct FoldyOptions {
  double tol = 1e-10;
  Index dense_limit = 4000;  // dense LU up to this many unknowns, GMRES beyond
  int restart = 80;
  int max_iterations = 4000;

  SolverOptions solver() const { return {tol, dense_limit, restart, max_iterations}; }
};

struct ImpedanceSolveResult {
  Vec3 incident_direction = Vec3::UnitZ();
  VectorXc effective_values;  // u_e(x_m)
  VectorXc charges;           // Q_m = -c_m u_e(x_m)
  VectorXc coupling;          // c_m = ζ|S| / (1 + ζJ/(4π|S|))
  SolveStats stats;
};

/// Q = -ζ|S| u_e / (1 + ζJ/(4π|S|)).
Complex charge_from_effective_field(Complex zeta, double a, const ShapeConstants& shape, Complex u_e);

/// c_m per particle; throws if a denominator vanishes.
VectorXc impedance_coupling(const ParticleCloud& cloud);

ImpedanceSolveResult assemble_and_solve(const BackgroundMedium& medium, const ParticleCloud& cloud,
                                        const Vec3& alpha, const FoldyOptions& options = {});

/// Throws InvariantViolation for points closer than d to a center.
void require_far_from_particles(const ParticleCloud& cloud, const Points& points);

/// u_M(x) = u₀(x) + Σ_m G(x, x_m) Q_m.
ComplexField evaluate_field(const ImpedanceSolveResult& result, const BackgroundMedium& medium,
                            const ParticleCloud& cloud, const Points& points);

/// A = A₀ + (1/4π) Σ_m u₀(x_m, -β) Q_m.
FarField far_field(const ImpedanceSolveResult& result, const BackgroundMedium& medium, const ParticleCloud& cloud,
                   const DirectionSet& directions);

}  // namespace smallbody
