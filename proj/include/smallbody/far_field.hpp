#pragma once

#include "smallbody/medium.hpp"

namespace smallbody {

/// Observation directions β. A lat-long grid also carries quadrature weights
/// over S² (Fejér in cos θ, uniform in φ); an explicit list carries none.
struct DirectionSet {
  Points directions;
  Eigen::VectorXd theta;
  Eigen::VectorXd phi;
  Eigen::VectorXd weights;  // empty unless n_theta > 0
  int n_theta = 0;
  int n_phi = 0;

  Index size() const { return directions.cols(); }
  bool has_quadrature() const { return weights.size() == directions.cols() && n_theta > 0; }
};

Vec3 spherical_direction(double theta, double phi);

DirectionSet lat_long_grid(int n_theta = 32, int n_phi = 64);
DirectionSet direction_list(const Points& directions);

/// Scattering amplitude samples A(β, α). `background` holds A₀ (zero for a free medium).
struct FarField {
  Vec3 incident_direction = Vec3::UnitZ();
  DirectionSet directions;
  VectorXc values;
  VectorXc background;
};

/// ∫_{S²} f dβ with the grid's weights.
double sphere_integral(const DirectionSet& directions, const Eigen::VectorXd& f);

/// (k/4π) ∫|A|² dβ.
double scattered_flux(const FarField& far, double k);

struct OpticalTheoremReport {
  double im_forward = 0.0;
  double flux = 0.0;
  double relative_error = 0.0;
};

OpticalTheoremReport optical_theorem(const FarField& far, Complex forward, double k);

/// A₀(β, α) = -(1/4π) Σ e^{-ikβ·z} q₀ u₀ h³ on the medium grid.
VectorXc background_amplitude(const BackgroundMedium& medium, const Vec3& alpha, const DirectionSet& directions);

}  // namespace smallbody
