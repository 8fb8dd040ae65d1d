#pragma once

#include "smallbody/far_field.hpp"
#include "smallbody/particles.hpp"

namespace smallbody {

/// Impedance limit: u = u₀ - ∫_D G p u.
struct ImpedanceLimitProblem {
  ImpedanceLimitProblem(BackgroundMedium medium, VectorXc p);

  BackgroundMedium medium;
  VectorXc p;
};

/// Hard limit with ν and β on the grid. β holds one tensor per node or a single
/// tensor for all nodes. ν must vanish on a collar of `collar` cells.
struct HardLimitProblem {
  HardLimitProblem(BackgroundMedium medium, Eigen::VectorXd nu, std::vector<Mat3> beta, int collar = 2);

  BackgroundMedium medium;
  Eigen::VectorXd nu;
  std::vector<Mat3> beta;

  const Mat3& beta_at(Index node) const { return beta.size() == 1 ? beta[0] : beta[std::size_t(node)]; }
};

struct LimitSolution {
  Vec3 incident_direction = Vec3::UnitZ();
  VectorXc values;              // on the grid nodes
  SolveStats stats;
  std::vector<double> changes;  // hard limit: relative change per iteration
};

/// p = 4π c₁² N h / (c₂ (1 + h)).
VectorXc potential_from_h_N(const VectorXc& h, const Eigen::VectorXd& N, const ShapeConstants& shape = {});

LimitSolution solve_impedance_limit(const ImpedanceLimitProblem& problem, const Vec3& alpha);

/// u(x) off the grid by the Nyström representation of the solved equation.
ComplexField evaluate_impedance_limit(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                                      const Points& points);

/// A = A₀ - (1/4π) Σ u₀(z,-β) p u h³.
FarField limiting_amplitude(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                            const DirectionSet& directions);

/// Dual route: -(1/4π) Σ e^{-ikβ·z} (q₀ + p) u h³ (total amplitude against the free space).
FarField limiting_amplitude_direct(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                                   const DirectionSet& directions);

/// Source density f = ν Δ𝒰 + Σ ∂_p(β_pj ∂_j𝒰 ν) by centred differences.
VectorXc hard_source(const HardLimitProblem& problem, const VectorXc& field);

/// One step 𝒰 ↦ u₀ + ∫ G f (integrated-by-parts dipole channel).
VectorXc hard_limit_step(const HardLimitProblem& problem, const VectorXc& u0, const VectorXc& field);

/// One step with the dipole channel written as -Σ ∫ ∂_pG ∂_j𝒰 β_pj ν.
VectorXc hard_limit_step_gradient_form(const HardLimitProblem& problem, const VectorXc& u0, const VectorXc& field);

/// First Born iterate written out directly: u₀ + ∫G [Δu₀ ν + Σ ∂_p(∂_j u₀ β_pj ν)].
VectorXc born_first_iterate(const HardLimitProblem& problem, const Vec3& alpha);

/// Variant with Δu₀ replaced by -k² n₀ u₀.
VectorXc born_first_iterate_substituted(const HardLimitProblem& problem, const Vec3& alpha);

LimitSolution solve_hard_limit(const HardLimitProblem& problem, const Vec3& alpha, int max_iter = 200,
                               double tol = 1e-10);

ComplexField evaluate_hard_limit(const HardLimitProblem& problem, const LimitSolution& u, const Points& points);

/// A = A₀ + (1/4π) Σ u₀(z,-β) f h³.
FarField hard_limit_amplitude(const HardLimitProblem& problem, const LimitSolution& u,
                              const DirectionSet& directions);

/// Grid-node sampling of u₀(·,α); convenience for callers building comparisons.
VectorXc incident_on_grid(const BackgroundMedium& medium, const Vec3& alpha);

}  // namespace smallbody
