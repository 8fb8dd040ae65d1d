#pragma once

// Nyström discretization of volume potentials on a uniform grid. Midpoint
// weights h³ off the diagonal; the diagonal carries the cube self-integral.

#include "smallbody/grid.hpp"
#include "smallbody/linear_solver.hpp"

#include <span>

namespace smallbody {

/// Translation-invariant table of the discrete free kernel K(i,j) = g̃(z_i,z_j) h³.
class VolumeKernel {
 public:
  VolumeKernel(const Grid& grid, double k);

  const Grid& grid() const { return grid_; }
  double wavenumber() const { return k_; }

  Complex entry(Index target, Index source) const;
  /// Entry of the discrete ∇_y kernel; the diagonal is the symmetric-cube principal value 0.
  CVec3 grad_y_entry(Index target, Index source) const;

  MatrixXc dense(std::span<const Index> rows, std::span<const Index> cols) const;

  /// (K s)(i) for every node i, summing over the non-zero entries of s.
  VectorXc apply(const VectorXc& source) const;
  /// Σ_j ∇_y g(z_i, z_j)·F_j h³ for every node i.
  VectorXc apply_grad_y(const Eigen::MatrixX3cd& flux) const;

 private:
  Index offset_index(Index target, Index source) const;

  Grid grid_;
  double k_;
  Eigen::Array3i span_;
  VectorXc table_;
  Eigen::MatrixX3cd grad_table_;
};

/// Solver for u + K(q u) = f on a grid (a discretized Lippmann–Schwinger
/// equation with potential q). Only nodes with q ≠ 0 are unknowns.
class LippmannSchwinger {
 public:
  LippmannSchwinger(const Grid& grid, double k, VectorXc potential, SolverOptions options = {});

  const VolumeKernel& kernel() const { return kernel_; }
  const VectorXc& potential() const { return potential_; }
  const std::vector<Index>& active() const { return active_; }
  const SolverOptions& options() const { return options_; }

  /// Solves (I + K_aa Q_a) x = rhs on the active nodes.
  VectorXc solve_active(const VectorXc& rhs_active, SolveStats* stats = nullptr) const;
  /// Full nodal solution: active block solve, then u_i = f_i - (K q u)_i elsewhere.
  VectorXc solve(const VectorXc& f, SolveStats* stats = nullptr) const;

 private:
  VolumeKernel kernel_;
  VectorXc potential_;
  std::vector<Index> active_;
  SolverOptions options_;
  std::optional<Eigen::PartialPivLU<MatrixXc>> lu_;
  MatrixXc system_;
};

}  // namespace smallbody
