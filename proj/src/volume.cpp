#include "smallbody/volume.hpp"

#include "smallbody/kernel.hpp"

#include <sstream>

namespace smallbody {

VolumeKernel::VolumeKernel(const Grid& grid, double k) : grid_(grid), k_(k) {
  const Eigen::Array3i& n = grid.dims();
  span_ = 2 * n - 1;
  const Index count = Index(span_(0)) * span_(1) * span_(2);
  table_.resize(count);
  grad_table_.resize(count, 3);
  const double h = grid.spacing();
  const double w = grid.cell_volume();
  const Vec3 origin = Vec3::Zero();
  for (int dk = -(n(2) - 1); dk <= n(2) - 1; ++dk) {
    for (int dj = -(n(1) - 1); dj <= n(1) - 1; ++dj) {
      for (int di = -(n(0) - 1); di <= n(0) - 1; ++di) {
        const Index t = (di + n(0) - 1) + Index(span_(0)) * ((dj + n(1) - 1) + Index(span_(1)) * (dk + n(2) - 1));
        if (di == 0 && dj == 0 && dk == 0) {
          table_(t) = cube_self_integral(h, k);
          grad_table_.row(t).setZero();
          continue;
        }
        // target - source = (di,dj,dk) h
        const Vec3 target = h * Vec3(di, dj, dk);
        table_(t) = free_kernel(target, origin, k) * w;
        grad_table_.row(t) = (free_kernel_grad_y<double>(target, origin, k) * w).transpose();
      }
    }
  }
}

Index VolumeKernel::offset_index(Index target, Index source) const {
  const Eigen::Array3i a = grid_.ijk(target);
  const Eigen::Array3i b = grid_.ijk(source);
  const Eigen::Array3i& n = grid_.dims();
  const Eigen::Array3i d = a - b + n - 1;
  return d(0) + Index(span_(0)) * (d(1) + Index(span_(1)) * d(2));
}

Complex VolumeKernel::entry(Index target, Index source) const { return table_(offset_index(target, source)); }

CVec3 VolumeKernel::grad_y_entry(Index target, Index source) const {
  return grad_table_.row(offset_index(target, source)).transpose();
}

MatrixXc VolumeKernel::dense(std::span<const Index> rows, std::span<const Index> cols) const {
  MatrixXc out(Index(rows.size()), Index(cols.size()));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < Index(cols.size()); ++c) {
    for (Index r = 0; r < Index(rows.size()); ++r) out(r, c) = entry(rows[r], cols[c]);
  }
  return out;
}

VectorXc VolumeKernel::apply(const VectorXc& source) const {
  std::vector<Index> support;
  for (Index j = 0; j < source.size(); ++j) {
    if (source(j) != Complex(0.0)) support.push_back(j);
  }
  VectorXc out = VectorXc::Zero(grid_.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < grid_.size(); ++i) {
    Complex acc = 0.0;
    for (Index j : support) acc += table_(offset_index(i, j)) * source(j);
    out(i) = acc;
  }
  return out;
}

VectorXc VolumeKernel::apply_grad_y(const Eigen::MatrixX3cd& flux) const {
  std::vector<Index> support;
  for (Index j = 0; j < flux.rows(); ++j) {
    if (flux.row(j).squaredNorm() != 0.0) support.push_back(j);
  }
  VectorXc out = VectorXc::Zero(grid_.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < grid_.size(); ++i) {
    Complex acc = 0.0;
    for (Index j : support) acc += grad_table_.row(offset_index(i, j)).cwiseProduct(flux.row(j)).sum();
    out(i) = acc;
  }
  return out;
}

LippmannSchwinger::LippmannSchwinger(const Grid& grid, double k, VectorXc potential, SolverOptions options)
    : kernel_(grid, k), potential_(std::move(potential)), options_(options) {
  if (potential_.size() != grid.size()) throw SchemaError("LippmannSchwinger: potential size does not match grid");
  for (Index i = 0; i < potential_.size(); ++i) {
    if (potential_(i) != Complex(0.0)) active_.push_back(i);
  }
  const Index n = Index(active_.size());
  if (n > 0 && n <= options_.dense_limit) {
    system_ = kernel_.dense(active_, active_);
    for (Index c = 0; c < n; ++c) system_.col(c) *= potential_(active_[c]);
    system_.diagonal().array() += 1.0;
    lu_.emplace(system_);
    const double rcond = lu_->rcond();
    if (!(rcond > 1e-14)) {
      std::ostringstream msg;
      msg << "Lippmann-Schwinger system is singular: reciprocal condition estimate " << rcond;
      throw SolverFailure(msg.str());
    }
  }
}

VectorXc LippmannSchwinger::solve_active(const VectorXc& rhs, SolveStats* stats) const {
  const Index n = Index(active_.size());
  if (rhs.size() != n) throw SchemaError("LippmannSchwinger: rhs size does not match active set");
  if (n == 0) {
    if (stats) *stats = SolveStats{};
    return rhs;
  }
  if (lu_) {
    VectorXc x = lu_->solve(rhs);
    const double bnorm = rhs.norm();
    const double rel = bnorm > 0.0 ? (system_ * x - rhs).norm() / bnorm : 0.0;
    if (stats) *stats = SolveStats{rel, 0, true};
    if (!(rel <= std::max(options_.tol, 1e-12))) {
      std::ostringstream msg;
      msg << "Lippmann-Schwinger direct solve residual " << rel << " exceeds tolerance";
      throw SolverFailure(msg.str());
    }
    return x;
  }
  VectorXc q(n);
  for (Index a = 0; a < n; ++a) q(a) = potential_(active_[a]);
  const LinearOperator apply = [&](const VectorXc& x) {
    const VectorXc qx = q.cwiseProduct(x);
    VectorXc y = x;
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < n; ++r) {
      Complex acc = 0.0;
      for (Index c = 0; c < n; ++c) acc += kernel_.entry(active_[r], active_[c]) * qx(c);
      y(r) += acc;
    }
    return y;
  };
  return gmres(apply, rhs, options_, stats);
}

VectorXc LippmannSchwinger::solve(const VectorXc& f, SolveStats* stats) const {
  if (f.size() != potential_.size()) throw SchemaError("LippmannSchwinger: rhs size does not match grid");
  const Index n = Index(active_.size());
  VectorXc rhs(n);
  for (Index a = 0; a < n; ++a) rhs(a) = f(active_[a]);
  const VectorXc x = solve_active(rhs, stats);
  VectorXc qu = VectorXc::Zero(f.size());
  for (Index a = 0; a < n; ++a) qu(active_[a]) = potential_(active_[a]) * x(a);
  VectorXc u = f - kernel_.apply(qu);
  // Keep the active values bit-identical to the block solution.
  for (Index a = 0; a < n; ++a) u(active_[a]) = x(a);
  return u;
}

}  // namespace smallbody
