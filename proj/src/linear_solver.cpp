#include "smallbody/linear_solver.hpp"

#include <cmath>
#include <sstream>

namespace smallbody {

namespace {

void givens(Complex a, Complex b, Complex& c, Complex& s) {
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double r = std::hypot(na, nb);
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  c = na / r;
  s = (a / na) * std::conj(b) / r;
}

}  // namespace

VectorXc gmres(const LinearOperator& apply, const VectorXc& rhs, const SolverOptions& options,
               SolveStats* stats) {
  const Index n = rhs.size();
  const double bnorm = rhs.norm();
  VectorXc x = VectorXc::Zero(n);
  if (stats) *stats = SolveStats{0.0, 0, false};
  if (bnorm == 0.0) return x;

  const int m = std::max(1, std::min<int>(options.restart, int(n)));
  int total = 0;
  double rel = 1.0;
  while (total < options.max_iterations) {
    VectorXc r = rhs - apply(x);
    double beta = r.norm();
    rel = beta / bnorm;
    if (rel <= options.tol) break;

    MatrixXc V(n, m + 1);
    MatrixXc H = MatrixXc::Zero(m + 1, m);
    VectorXc cs(m), sn(m), g = VectorXc::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;
    int j = 0;
    for (; j < m && total < options.max_iterations; ++j, ++total) {
      VectorXc w = apply(V.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) > 0.0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const Complex t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn(i)) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      givens(H(j, j), H(j + 1, j), cs(j), sn(j));
      H(j, j) = cs(j) * H(j, j) + sn(j) * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g(j + 1) = -std::conj(sn(j)) * g(j);
      g(j) = cs(j) * g(j);
      rel = std::abs(g(j + 1)) / bnorm;
      if (rel <= options.tol || std::abs(H(j, j)) == 0.0) {
        ++j;
        ++total;
        break;
      }
    }
    const VectorXc y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += V.leftCols(j) * y;
    if (rel <= options.tol) {
      // Confirm with a true residual; the Arnoldi estimate can drift.
      rel = (rhs - apply(x)).norm() / bnorm;
      if (rel <= options.tol) break;
    }
  }
  if (stats) *stats = SolveStats{rel, total, false};
  if (!(rel <= options.tol)) {
    std::ostringstream msg;
    msg << "GMRES did not converge: relative residual " << rel << " after " << total << " iterations";
    throw SolverFailure(msg.str());
  }
  return x;
}

VectorXc dense_solve(const MatrixXc& matrix, const VectorXc& rhs, const SolverOptions& options,
                     SolveStats* stats) {
  Eigen::PartialPivLU<MatrixXc> lu(matrix);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "singular or ill-conditioned system: reciprocal condition estimate " << rcond;
    throw SolverFailure(msg.str());
  }
  VectorXc x = lu.solve(rhs);
  const double bnorm = rhs.norm();
  const double rel = bnorm > 0.0 ? (matrix * x - rhs).norm() / bnorm : 0.0;
  if (stats) *stats = SolveStats{rel, 0, true};
  if (!(rel <= std::max(options.tol, 1e-12))) {
    std::ostringstream msg;
    msg << "direct solve residual " << rel << " exceeds tolerance (rcond " << rcond << ")";
    throw SolverFailure(msg.str());
  }
  return x;
}

VectorXc solve_system(Index n, const std::function<MatrixXc()>& assemble, const LinearOperator& apply,
                      const VectorXc& rhs, const SolverOptions& options, SolveStats* stats) {
  if (n <= options.dense_limit) return dense_solve(assemble(), rhs, options, stats);
  return gmres(apply, rhs, options, stats);
}

}  // namespace smallbody
