#include "smallbody/far_field.hpp"

#include <algorithm>
#include <cmath>

namespace smallbody {

Vec3 spherical_direction(double theta, double phi) {
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

namespace {

// Fejér's first rule on [-1, 1] at x_j = cos θ_j, θ_j = (2j+1)π/(2n).
Eigen::VectorXd fejer_weights(int n) {
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) {
    const double t = (2.0 * j + 1.0) * kPi / (2.0 * n);
    double s = 0.0;
    for (int l = 1; l <= n / 2; ++l) s += std::cos(2.0 * l * t) / (4.0 * l * l - 1.0);
    w(j) = 2.0 / n * (1.0 - 2.0 * s);
  }
  return w;
}

}  // namespace

DirectionSet lat_long_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw SchemaError("lat_long_grid: counts must be positive");
  DirectionSet set;
  set.n_theta = n_theta;
  set.n_phi = n_phi;
  const Index n = Index(n_theta) * n_phi;
  set.directions.resize(3, n);
  set.theta.resize(n);
  set.phi.resize(n);
  set.weights.resize(n);
  const Eigen::VectorXd wt = fejer_weights(n_theta);
  const double wphi = 2.0 * kPi / n_phi;
  Index c = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = (2.0 * i + 1.0) * kPi / (2.0 * n_theta);
    for (int j = 0; j < n_phi; ++j, ++c) {
      const double phi = wphi * j;
      set.theta(c) = theta;
      set.phi(c) = phi;
      set.weights(c) = wt(i) * wphi;
      set.directions.col(c) = spherical_direction(theta, phi);
    }
  }
  return set;
}

DirectionSet direction_list(const Points& directions) {
  DirectionSet set;
  set.directions = directions;
  set.theta.resize(directions.cols());
  set.phi.resize(directions.cols());
  for (Index c = 0; c < directions.cols(); ++c) {
    const Vec3 b = directions.col(c);
    require_unit(b, "direction_list");
    set.theta(c) = std::acos(std::clamp(b.z(), -1.0, 1.0));
    set.phi(c) = std::atan2(b.y(), b.x());
  }
  return set;
}

double sphere_integral(const DirectionSet& directions, const Eigen::VectorXd& f) {
  if (!directions.has_quadrature()) throw SchemaError("sphere_integral: direction set has no quadrature weights");
  if (f.size() != directions.size()) throw SchemaError("sphere_integral: size mismatch");
  return directions.weights.dot(f);
}

double scattered_flux(const FarField& far, double k) {
  return k / (4.0 * kPi) * sphere_integral(far.directions, far.values.cwiseAbs2());
}

OpticalTheoremReport optical_theorem(const FarField& far, Complex forward, double k) {
  OpticalTheoremReport r;
  r.im_forward = forward.imag();
  r.flux = scattered_flux(far, k);
  const double scale = std::max(std::abs(r.im_forward), r.flux);
  r.relative_error = scale > 0.0 ? std::abs(r.im_forward - r.flux) / scale : 0.0;
  return r;
}

VectorXc background_amplitude(const BackgroundMedium& medium, const Vec3& alpha, const DirectionSet& directions) {
  VectorXc out = VectorXc::Zero(directions.size());
  if (medium.is_free()) return out;
  const VectorXc u0 = medium.incident_on_grid(alpha);
  const Grid& grid = medium.grid();
  const auto& active = medium.background_solver().active();
  const double k = medium.k();
  const double scale = -grid.cell_volume() / (4.0 * kPi);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < directions.size(); ++b) {
    const Vec3 beta = directions.directions.col(b);
    Complex acc = 0.0;
    for (Index l : active) acc += std::exp(-kI * k * beta.dot(grid.node(l))) * medium.q0()(l) * u0(l);
    out(b) = scale * acc;
  }
  return out;
}

}  // namespace smallbody
