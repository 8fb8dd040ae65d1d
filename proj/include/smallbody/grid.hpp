#pragma once

#include "smallbody/types.hpp"

#include <optional>

namespace smallbody {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  Vec3 size() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double volume() const { return size().prod(); }
  bool contains(const Vec3& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

/// The scatterer-bearing domain D: an axis-aligned box or a ball.
class Region {
 public:
  enum class Shape { Box, Ball };

  static Region box(const Vec3& lo, const Vec3& hi);
  static Region ball(const Vec3& center, double radius);

  Shape shape() const { return shape_; }
  bool contains(const Vec3& x) const;
  Box bounds() const;
  Vec3 center() const;
  double diameter() const;
  double volume() const;
  double radius() const { return radius_; }

 private:
  Shape shape_ = Shape::Box;
  Box box_{};
  double radius_ = 0.0;
};

/// Uniform cell-centred Cartesian grid with cubic cells. Node (i,j,k) sits at
/// lo + (i+½, j+½, k+½)·h and owns the cube of side h around it.
class Grid {
 public:
  Grid() = default;
  Grid(const Box& box, const Eigen::Array3i& dims);
  /// Cubic cells of side `spacing` covering `box` (box is expanded to a whole number of cells).
  static Grid with_spacing(const Box& box, double spacing);

  const Box& box() const { return box_; }
  const Eigen::Array3i& dims() const { return dims_; }
  double spacing() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }
  Index size() const { return Index(dims_(0)) * dims_(1) * dims_(2); }

  Index index(int i, int j, int k) const { return i + Index(dims_(0)) * (j + Index(dims_(1)) * k); }
  Eigen::Array3i ijk(Index n) const;
  Vec3 node(Index n) const;
  Vec3 node(int i, int j, int k) const;
  Points nodes() const;

  /// Index of the cell containing x, if x lies inside the grid box.
  std::optional<Index> cell_of(const Vec3& x) const;
  /// Index of a node that coincides with x to within 1e-12·h.
  std::optional<Index> coincident_node(const Vec3& x) const;

 private:
  Box box_{};
  Eigen::Array3i dims_ = Eigen::Array3i::Zero();
  double h_ = 0.0;
};

/// Trilinear interpolation of a nodal field. Points in the outer half-cell
/// clamp to the boundary layer of nodes; points outside the box throw.
VectorXc interpolate_trilinear(const Grid& grid, const VectorXc& values, const Points& points);

// Centred second-order finite differences. Nodes whose stencil leaves the
// grid receive 0; callers multiply by coefficients that vanish there.
VectorXc fd_laplacian(const Grid& grid, const VectorXc& u);
/// Column p holds ∂_p u.
Eigen::MatrixX3cd fd_gradient(const Grid& grid, const VectorXc& u);
/// Σ_p ∂_p F_p for a nodal vector field stored column-wise.
VectorXc fd_divergence(const Grid& grid, const Eigen::MatrixX3cd& flux);

/// True when every node within `width` cells of the grid boundary has |f| == 0.
bool vanishes_on_collar(const Grid& grid, const Eigen::VectorXd& f, int width);

}  // namespace smallbody
