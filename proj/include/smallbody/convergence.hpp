#pragma once

#include "smallbody/foldy_neumann.hpp"
#include "smallbody/limit_solver.hpp"

#include <functional>
#include <string>

namespace smallbody {

enum class StudyMode { Impedance, Hard };

struct CountingPair {
  double particle_sum = 0.0;  // weight · Σ_m f(x_m)
  double integral = 0.0;      // Σ_nodes f · density · h³
  double relative_difference() const;
};

/// Optional exclusion ball removed from both sides (for singular f).
struct Exclusion {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// weight = a (impedance) or c₃a³ (hard); density = N or ν on the grid.
CountingPair counting_measure_check(const ParticleCloud& cloud, const Grid& grid, const Eigen::VectorXd& density,
                                    const std::function<double(const Vec3&)>& f, const Exclusion& exclusion = {});

struct ScaleRecord {
  double a = 0.0;
  Index particles = 0;
  double d = 0.0;
  double cell_size = 0.0;
  double max_error = 0.0;  // max_probes |u_M - u| / |u|
  double rms_error = 0.0;
  double max_charge = 0.0;
  Complex forward_discrete = 0.0;
  Complex forward_limit = 0.0;
  CountingPair count_unit;
  CountingPair count_smooth;
  double residual = 0.0;
  std::string failure;  // empty on success
};

struct ScaleStudy {
  StudyMode mode = StudyMode::Impedance;
  Vec3 incident_direction = Vec3::UnitZ();
  Points probes;
  std::vector<ScaleRecord> scales;
  double exponent_particles = 0.0;  // M ∝ a^e
  double exponent_charge = 0.0;     // max|Q| ∝ a^e
  double exponent_error = 0.0;
  bool strictly_decreasing = false;
  bool exact = false;     // every error ≤ 1e-13 (e.g. an empty design)
  bool complete = false;  // every scale succeeded
};

/// 26 directions (3×3×3 stencil minus centre), normalized, at 5·diam(D) around D's centre.
Points far_probes(const Region& domain);

/// Least-squares slope of log y against log x.
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

/// max and RMS of |u_M - u| / |u| over the probes.
std::pair<double, double> relative_errors(const VectorXc& discrete, const VectorXc& reference);

ScaleStudy run_impedance_study(const BackgroundMedium& medium, const VectorXc& h, const Eigen::VectorXd& N,
                               const std::vector<double>& a_sequence, const Vec3& alpha, const Points& probes,
                               const ShapeConstants& shape = {}, const LatticeOptions& lattice = {});

ScaleStudy run_hard_study(const BackgroundMedium& medium, const Eigen::VectorXd& nu, const Mat3& beta,
                          const std::vector<double>& a_sequence, const Vec3& alpha, const Points& probes,
                          const ShapeConstants& shape = {}, const LatticeOptions& lattice = {});

}  // namespace smallbody
