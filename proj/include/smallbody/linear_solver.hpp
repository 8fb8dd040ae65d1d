#pragma once

#include "smallbody/types.hpp"

#include <functional>

namespace smallbody {

struct SolverOptions {
  double tol = 1e-10;          // relative residual target
  Index dense_limit = 2000;    // largest system factorized densely
  int restart = 60;
  int max_iterations = 2000;
};

struct SolveStats {
  double residual = 0.0;  // ‖Ax - b‖ / ‖b‖
  int iterations = 0;     // 0 for a direct solve
  bool direct = true;
};

using LinearOperator = std::function<VectorXc(const VectorXc&)>;

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
/// Throws SolverFailure with the achieved residual when the tolerance is not met.
VectorXc gmres(const LinearOperator& apply, const VectorXc& rhs, const SolverOptions& options,
               SolveStats* stats = nullptr);

/// Dense LU solve with a reciprocal-condition guard and a residual check.
VectorXc dense_solve(const MatrixXc& matrix, const VectorXc& rhs, const SolverOptions& options,
                     SolveStats* stats = nullptr);

/// Picks dense LU below options.dense_limit, GMRES otherwise. `assemble` is
/// only called on the dense path.
VectorXc solve_system(Index n, const std::function<MatrixXc()>& assemble, const LinearOperator& apply,
                      const VectorXc& rhs, const SolverOptions& options, SolveStats* stats = nullptr);

}  // namespace smallbody
