#include "smallbody/grid.hpp"

#include <algorithm>
#include <cmath>

namespace smallbody {

Region Region::box(const Vec3& lo, const Vec3& hi) {
  if (!((hi - lo).array() > 0.0).all()) throw SchemaError("Region::box: hi must exceed lo on every axis");
  Region r;
  r.shape_ = Shape::Box;
  r.box_ = Box{lo, hi};
  return r;
}

Region Region::ball(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw SchemaError("Region::ball: radius must be positive");
  Region r;
  r.shape_ = Shape::Ball;
  r.radius_ = radius;
  r.box_ = Box{center - Vec3::Constant(radius), center + Vec3::Constant(radius)};
  return r;
}

bool Region::contains(const Vec3& x) const {
  if (shape_ == Shape::Box) return box_.contains(x);
  return (x - box_.center()).norm() <= radius_;
}

Box Region::bounds() const { return box_; }

Vec3 Region::center() const { return box_.center(); }

double Region::diameter() const {
  return shape_ == Shape::Box ? box_.size().norm() : 2.0 * radius_;
}

double Region::volume() const {
  return shape_ == Shape::Box ? box_.volume() : 4.0 * kPi / 3.0 * radius_ * radius_ * radius_;
}

Grid::Grid(const Box& box, const Eigen::Array3i& dims) : box_(box), dims_(dims) {
  if ((dims <= 0).any()) throw SchemaError("Grid: resolution must be positive");
  const Eigen::Array3d h = box.size().array() / dims.cast<double>();
  if (!(h > 0.0).all()) throw SchemaError("Grid: degenerate box");
  h_ = h(0);
  if (std::abs(h(1) - h_) > 1e-9 * h_ || std::abs(h(2) - h_) > 1e-9 * h_) {
    throw SchemaError("Grid: cells must be cubes (equal spacing on all axes)");
  }
}

Grid Grid::with_spacing(const Box& box, double spacing) {
  if (!(spacing > 0.0)) throw SchemaError("Grid: spacing must be positive");
  Eigen::Array3i dims;
  for (int a = 0; a < 3; ++a) {
    dims(a) = std::max(1, int(std::ceil(box.size()(a) / spacing - 1e-9)));
  }
  const Vec3 extent = dims.cast<double>().matrix() * spacing;
  const Vec3 c = box.center();
  return Grid(Box{c - 0.5 * extent, c + 0.5 * extent}, dims);
}

Eigen::Array3i Grid::ijk(Index n) const {
  const int i = int(n % dims_(0));
  const Index rest = n / dims_(0);
  return {i, int(rest % dims_(1)), int(rest / dims_(1))};
}

Vec3 Grid::node(int i, int j, int k) const {
  return box_.lo + h_ * Vec3(i + 0.5, j + 0.5, k + 0.5);
}

Vec3 Grid::node(Index n) const {
  const Eigen::Array3i c = ijk(n);
  return node(c(0), c(1), c(2));
}

Points Grid::nodes() const {
  Points p(3, size());
  for (Index n = 0; n < size(); ++n) p.col(n) = node(n);
  return p;
}

std::optional<Index> Grid::cell_of(const Vec3& x) const {
  if (!box_.contains(x)) return std::nullopt;
  Eigen::Array3i c;
  for (int a = 0; a < 3; ++a) {
    c(a) = std::clamp(int(std::floor((x(a) - box_.lo(a)) / h_)), 0, dims_(a) - 1);
  }
  return index(c(0), c(1), c(2));
}

std::optional<Index> Grid::coincident_node(const Vec3& x) const {
  const auto cell = cell_of(x);
  if (!cell) return std::nullopt;
  if ((node(*cell) - x).norm() <= 1e-12 * h_) return cell;
  return std::nullopt;
}

VectorXc interpolate_trilinear(const Grid& grid, const VectorXc& values, const Points& points) {
  if (values.size() != grid.size()) throw SchemaError("interpolate_trilinear: field size does not match grid");
  VectorXc out(points.cols());
  const Eigen::Array3i& n = grid.dims();
  const double h = grid.spacing();
  for (Index p = 0; p < points.cols(); ++p) {
    const Vec3 x = points.col(p);
    if (!grid.box().contains(x)) throw SchemaError("interpolate_trilinear: point outside the grid box");
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
      // Node coordinate s: node i sits at s = i.
      const double s = std::clamp((x(a) - grid.box().lo(a)) / h - 0.5, 0.0, double(n(a) - 1));
      i0[a] = std::min(int(std::floor(s)), std::max(n(a) - 2, 0));
      t[a] = n(a) > 1 ? s - i0[a] : 0.0;
    }
    Complex acc = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dk ? t[2] : 1 - t[2]);
      if (w == 0.0) continue;
      const int ii = std::min(i0[0] + di, n(0) - 1);
      const int jj = std::min(i0[1] + dj, n(1) - 1);
      const int kk = std::min(i0[2] + dk, n(2) - 1);
      acc += w * values(grid.index(ii, jj, kk));
    }
    out(p) = acc;
  }
  return out;
}

namespace {

bool interior(const Eigen::Array3i& c, const Eigen::Array3i& n) {
  return (c > 0).all() && (c < n - 1).all();
}

}  // namespace

VectorXc fd_laplacian(const Grid& grid, const VectorXc& u) {
  const Eigen::Array3i& n = grid.dims();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  VectorXc out = VectorXc::Zero(grid.size());
  for (Index m = 0; m < grid.size(); ++m) {
    const Eigen::Array3i c = grid.ijk(m);
    if (!interior(c, n)) continue;
    const Complex sum = u(grid.index(c(0) + 1, c(1), c(2))) + u(grid.index(c(0) - 1, c(1), c(2))) +
                        u(grid.index(c(0), c(1) + 1, c(2))) + u(grid.index(c(0), c(1) - 1, c(2))) +
                        u(grid.index(c(0), c(1), c(2) + 1)) + u(grid.index(c(0), c(1), c(2) - 1));
    out(m) = (sum - 6.0 * u(m)) * inv_h2;
  }
  return out;
}

Eigen::MatrixX3cd fd_gradient(const Grid& grid, const VectorXc& u) {
  const Eigen::Array3i& n = grid.dims();
  const double inv_2h = 0.5 / grid.spacing();
  Eigen::MatrixX3cd out = Eigen::MatrixX3cd::Zero(grid.size(), 3);
  for (Index m = 0; m < grid.size(); ++m) {
    const Eigen::Array3i c = grid.ijk(m);
    if (!interior(c, n)) continue;
    out(m, 0) = (u(grid.index(c(0) + 1, c(1), c(2))) - u(grid.index(c(0) - 1, c(1), c(2)))) * inv_2h;
    out(m, 1) = (u(grid.index(c(0), c(1) + 1, c(2))) - u(grid.index(c(0), c(1) - 1, c(2)))) * inv_2h;
    out(m, 2) = (u(grid.index(c(0), c(1), c(2) + 1)) - u(grid.index(c(0), c(1), c(2) - 1))) * inv_2h;
  }
  return out;
}

VectorXc fd_divergence(const Grid& grid, const Eigen::MatrixX3cd& flux) {
  const Eigen::Array3i& n = grid.dims();
  const double inv_2h = 0.5 / grid.spacing();
  VectorXc out = VectorXc::Zero(grid.size());
  for (Index m = 0; m < grid.size(); ++m) {
    const Eigen::Array3i c = grid.ijk(m);
    if (!interior(c, n)) continue;
    out(m) = ((flux(grid.index(c(0) + 1, c(1), c(2)), 0) - flux(grid.index(c(0) - 1, c(1), c(2)), 0)) +
              (flux(grid.index(c(0), c(1) + 1, c(2)), 1) - flux(grid.index(c(0), c(1) - 1, c(2)), 1)) +
              (flux(grid.index(c(0), c(1), c(2) + 1), 2) - flux(grid.index(c(0), c(1), c(2) - 1), 2))) *
             inv_2h;
  }
  return out;
}

bool vanishes_on_collar(const Grid& grid, const Eigen::VectorXd& f, int width) {
  const Eigen::Array3i& n = grid.dims();
  for (Index m = 0; m < grid.size(); ++m) {
    const Eigen::Array3i c = grid.ijk(m);
    const bool in_collar = (c < width).any() || (c >= n - width).any();
    if (in_collar && f(m) != 0.0) return false;
  }
  return true;
}

}  // namespace smallbody
