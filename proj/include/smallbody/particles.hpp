#pragma once

#include "smallbody/medium.hpp"

#include <string>

namespace smallbody {

enum class ParticleKind { Impedance, Hard };

/// |S| = c₁a², J = c₂a³, V = c₃a³. One triple per cloud.
struct ShapeConstants {
  double c1 = 4.0 * kPi;
  double c2 = 16.0 * kPi * kPi;
  double c3 = 4.0 * kPi / 3.0;

  static ShapeConstants ball() { return {}; }
  double surface(double a) const { return c1 * a * a; }
  double j_integral(double a) const { return c2 * a * a * a; }
  double volume(double a) const { return c3 * a * a * a; }
  /// 4π c₁² / c₂; equals 4π for balls.
  double impedance_factor() const { return 4.0 * kPi * c1 * c1 / c2; }
};

bool operator==(const ShapeConstants& a, const ShapeConstants& b);

/// Per-cell bookkeeping of a lattice-built cloud.
struct LatticeCell {
  Eigen::Array3i block = Eigen::Array3i::Zero();  // block index
  double measure = 0.0;                           // ∫_cell N / a  or  ∫_cell ν / (c₃a³)
  Index count = 0;
  double volume = 0.0;                            // cell volume (partial blocks at the grid edge are smaller)
  double spacing = 0.0;                           // smallest sub-lattice step in the cell
};

struct LatticeReport {
  int cell_nodes = 0;  // B: each cell is a B×B×B block of grid nodes
  double cell_size = 0.0;
  std::vector<LatticeCell> cells;  // occupied cells only
  double requested = 0.0;          // Σ measure
  double rounding_discrepancy = 0.0;  // Σ |count - measure|
};

struct ParticleCloud {
  ParticleKind kind = ParticleKind::Impedance;
  Points centers = Points(3, 0);
  double a = 0.0;
  double d = 0.0;  // min pairwise distance; 10a when M < 2
  ShapeConstants shape;
  VectorXc zeta;            // impedance kind
  VectorXc h;               // h(x_m) with ζ_m = 4πc₁h/(c₂a)
  std::vector<Mat3> beta;   // hard kind
  LatticeReport lattice;

  Index size() const { return centers.cols(); }
  bool empty() const { return centers.cols() == 0; }
};

struct LatticeOptions {
  int cell_nodes = 0;         // 0 picks the smallest block with ≥ 27 particles in the densest cell
  Index max_particles = 200000;
  double min_spacing_ratio = 10.0;  // d ≥ ratio·a
  double max_ka = 0.1;
};

Mat3 ball_polarizability();

/// ζ = 4πc₁h/(c₂a); reduces to h/a for balls.
Complex impedance_from_h(Complex h, double a, const ShapeConstants& shape);
Complex h_from_impedance(Complex zeta, double a, const ShapeConstants& shape);

/// Minimum pairwise distance (spatial hash); +inf for fewer than two points.
double min_pairwise_distance(const Points& centers, Index* first = nullptr, Index* second = nullptr);

ParticleCloud make_impedance_cloud(const Points& centers, double a, const VectorXc& h,
                                   const ShapeConstants& shape = {});
ParticleCloud make_hard_cloud(const Points& centers, double a, const Mat3& beta, const ShapeConstants& shape = {});

ParticleCloud build_cloud_impedance(const BackgroundMedium& medium, double a, const VectorXc& h_field,
                                    const Eigen::VectorXd& N_field, const ShapeConstants& shape = {},
                                    const LatticeOptions& options = {});
ParticleCloud build_cloud_hard(const BackgroundMedium& medium, double a, const Eigen::VectorXd& nu_field,
                               const Mat3& beta, const ShapeConstants& shape = {},
                               const LatticeOptions& options = {});

struct CloudValidation {
  Index particles = 0;
  double ka = 0.0;
  double spacing_over_a = 0.0;  // d/a, 0 for an empty cloud
  double max_zeta_a = 0.0;
  double volume_fraction = 0.0;  // M V over the occupied lattice volume (|D| without lattice data)
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

CloudValidation validate_cloud(const ParticleCloud& cloud, const BackgroundMedium& medium,
                               const LatticeOptions& options = {});
/// Throws InvariantViolation listing every violation.
void require_valid(const ParticleCloud& cloud, const BackgroundMedium& medium, const LatticeOptions& options = {});

}  // namespace smallbody
