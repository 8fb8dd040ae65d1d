#pragma once

#include "smallbody/convergence.hpp"

namespace smallbody {

struct DesignSpec {
  DesignSpec(BackgroundMedium medium, VectorXc target_n, double a, ShapeConstants shape = {},
             LatticeOptions lattice = {});

  BackgroundMedium medium;
  VectorXc target_n;
  double a;
  ShapeConstants shape;
  LatticeOptions lattice;
};

/// A: p₁ > 0, p₂ < 0.  B: p₂ = 0, p₁ > 0.  C: p₂ = 0, p₁ < 0.  D: p = 0.
/// E: p₁ ≤ 0, p₂ < 0 (extrapolated beyond the constructive case).
enum class DesignBranch { A, B, C, D, E };

char branch_letter(DesignBranch b);

struct HNChoice {
  VectorXc h;
  Eigen::VectorXd N;
  std::vector<DesignBranch> branches;
  bool extrapolated = false;  // some node used branch E
  double max_round_trip_error = 0.0;
};

struct Feasibility {
  double ka = 0.0;
  Index particles = 0;
  double spacing_over_a = 0.0;
  double volume_fraction = 0.0;
  int cell_nodes = 0;
  double cell_size = 0.0;
  Index max_cell_count = 0;
  double min_cell_spacing_over_a = 0.0;
  bool extrapolated = false;
};

struct DesignResult {
  VectorXc p;
  VectorXc h;
  Eigen::VectorXd N;
  std::vector<DesignBranch> branches;
  ParticleCloud cloud;
  Feasibility feasibility;
};

/// p = k² (n₀ - n).
VectorXc target_to_potential(const DesignSpec& spec);

/// Node-wise branch policy; verifies 4πc₁²Nh/(c₂(1+h)) = p to 1e-12 relative.
HNChoice choose_h_N(const VectorXc& p, const ShapeConstants& shape = {});

DesignResult realize(const DesignSpec& spec, const HNChoice& choice);
DesignResult design(const DesignSpec& spec);

struct DesignVerification {
  ScaleStudy study;
  bool decreasing = false;
  double final_error = 0.0;
  bool success = false;
  bool extrapolated = false;
};

/// Solves the discrete and continuum problems for each a and compares at probes.
DesignVerification verify_design(const DesignResult& result, const DesignSpec& spec, const Vec3& alpha,
                                 const std::vector<double>& a_sequence, const Points& probes);

}  // namespace smallbody
