#pragma once

#include "smallbody/foldy_impedance.hpp"

namespace smallbody {

struct HardSolveResult {
  Vec3 incident_direction = Vec3::UnitZ();
  VectorXc effective_values;   // u_e(x_m)
  CPoints effective_gradients; // ∇u_e(x_m), column-wise
  VectorXc charges;            // Q_m = V (q₀(x_m) - k²) u_e(x_m)
  CPoints dipole_moments;      // P_m,p = -V β_pj ∂_j u_e(x_m)
  SolveStats stats;
};

/// Solves the 4M value-and-gradient system with self terms excluded.
HardSolveResult assemble_and_solve_hard(const BackgroundMedium& medium, const ParticleCloud& cloud,
                                        const Vec3& alpha, const FoldyOptions& options = {});

/// u_M(x) = u₀(x) + Σ_m [G(x,x_m) Q_m + ∇_y G(x,x_m)·P_m].
ComplexField evaluate_field_hard(const HardSolveResult& result, const BackgroundMedium& medium,
                                 const ParticleCloud& cloud, const Points& points);

/// Monopole and dipole sums of the scattered field, evaluated separately.
struct FieldParts {
  VectorXc monopole;
  VectorXc dipole;
};
FieldParts scattered_parts_hard(const HardSolveResult& result, const BackgroundMedium& medium,
                                const ParticleCloud& cloud, const Points& points);

/// A = A₀ + (1/4π) Σ_m [u₀(x_m,-β) Q_m + ∇u₀(x_m,-β)·P_m]; for q₀ ≡ 0 the bracket is
/// e^{-ikβ·x_m}(Q_m - ikβ·P_m).
FarField far_field_hard(const HardSolveResult& result, const BackgroundMedium& medium, const ParticleCloud& cloud,
                        const DirectionSet& directions);

}  // namespace smallbody
