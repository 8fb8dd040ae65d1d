#include "smallbody/limit_solver.hpp"

#include <sstream>

namespace smallbody {

namespace {

void require_grid_field(const BackgroundMedium& medium, Index size, const char* what) {
  if (size != medium.grid().size()) {
    std::ostringstream msg;
    msg << what << " must be sampled on the medium grid (" << medium.grid().size() << " nodes)";
    throw SchemaError(msg.str());
  }
}

// ∫ G f over the grid for every node: with q₀ ≠ 0, w + K(q₀ w) = K f.
VectorXc apply_green(const BackgroundMedium& medium, const VolumeKernel& kernel, const VectorXc& f) {
  const VectorXc Kf = kernel.apply(f);
  if (medium.is_free()) return Kf;
  return medium.background_solver().solve(Kf);
}

const VolumeKernel& free_kernel_table(const BackgroundMedium& medium) {
  return medium.background_solver().kernel();
}

}  // namespace

ImpedanceLimitProblem::ImpedanceLimitProblem(BackgroundMedium m, VectorXc p_in)
    : medium(std::move(m)), p(std::move(p_in)) {
  require_grid_field(medium, p.size(), "p");
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) != Complex(0.0) && !medium.inside()[std::size_t(i)]) {
      std::ostringstream msg;
      msg << "p must vanish outside D (node " << i << ")";
      throw InvariantViolation(msg.str());
    }
    if (p(i).imag() > 0.0) {
      std::ostringstream msg;
      msg << "Im p > 0 at node " << i << " (requires Im p <= 0)";
      throw InvariantViolation(msg.str());
    }
  }
}

HardLimitProblem::HardLimitProblem(BackgroundMedium m, Eigen::VectorXd nu_in, std::vector<Mat3> beta_in, int collar)
    : medium(std::move(m)), nu(std::move(nu_in)), beta(std::move(beta_in)) {
  require_grid_field(medium, nu.size(), "nu");
  if (beta.size() != 1 && Index(beta.size()) != nu.size()) {
    throw SchemaError("beta must hold one tensor or one tensor per grid node");
  }
  for (Index i = 0; i < nu.size(); ++i) {
    std::ostringstream msg;
    if (!(nu(i) >= 0.0)) {
      msg << "nu < 0 at node " << i;
      throw InvariantViolation(msg.str());
    }
    if (nu(i) > 0.0 && !medium.inside()[std::size_t(i)]) {
      msg << "nu must vanish outside D (node " << i << ")";
      throw InvariantViolation(msg.str());
    }
  }
  if (!vanishes_on_collar(medium.grid(), nu, collar)) {
    std::ostringstream msg;
    msg << "nu must vanish on a collar of " << collar << " cells at the grid boundary";
    throw InvariantViolation(msg.str());
  }
}

VectorXc potential_from_h_N(const VectorXc& h, const Eigen::VectorXd& N, const ShapeConstants& shape) {
  if (h.size() != N.size()) throw SchemaError("potential_from_h_N: h and N differ in length");
  VectorXc p(h.size());
  const double kappa = shape.impedance_factor();
  for (Index i = 0; i < h.size(); ++i) {
    if (N(i) == 0.0) {
      p(i) = 0.0;
      continue;
    }
    if (std::abs(1.0 + h(i)) < 1e-12) {
      std::ostringstream msg;
      msg << "h = -1 at node " << i << " where N > 0";
      throw InvariantViolation(msg.str());
    }
    p(i) = kappa * N(i) * h(i) / (1.0 + h(i));
  }
  return p;
}

VectorXc incident_on_grid(const BackgroundMedium& medium, const Vec3& alpha) { return medium.incident_on_grid(alpha); }

LimitSolution solve_impedance_limit(const ImpedanceLimitProblem& problem, const Vec3& alpha) {
  require_unit(alpha, "solve_impedance_limit");
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  LimitSolution out;
  out.incident_direction = alpha;
  VectorXc plane(grid.size());
  for (Index i = 0; i < grid.size(); ++i) plane(i) = std::exp(kI * medium.k() * alpha.dot(grid.node(i)));
  const LippmannSchwinger full(grid, medium.k(), medium.q0() + problem.p, medium.solver_options());
  out.values = full.solve(plane, &out.stats);
  return out;
}

ComplexField evaluate_impedance_limit(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                                      const Points& points) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  const double k = medium.k();
  const Vec3 alpha = u.incident_direction;
  ComplexField out{points, VectorXc(points.cols()), alpha};
  const VectorXc source = (medium.q0() + problem.p).cwiseProduct(u.values) * grid.cell_volume();
  std::vector<Index> support;
  for (Index i = 0; i < source.size(); ++i) {
    if (source(i) != Complex(0.0)) support.push_back(i);
  }
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < points.cols(); ++p) {
    Complex acc = 0.0;
    for (Index l : support) acc += regularized_kernel(grid, k, points.col(p), l) * source(l);
    out.values(p) = std::exp(kI * k * alpha.dot(points.col(p))) - acc;
  }
  return out;
}

FarField limiting_amplitude(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                            const DirectionSet& directions) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  FarField far;
  far.incident_direction = u.incident_direction;
  far.directions = directions;
  far.background = background_amplitude(medium, u.incident_direction, directions);
  far.values = far.background;
  const VectorXc pu = problem.p.cwiseProduct(u.values);
  const double scale = -grid.cell_volume() / (4.0 * kPi);
  for (Index b = 0; b < directions.size(); ++b) {
    const VectorXc u0 = medium.incident_on_grid(-Vec3(directions.directions.col(b)));
    far.values(b) += scale * u0.cwiseProduct(pu).sum();
  }
  return far;
}

FarField limiting_amplitude_direct(const ImpedanceLimitProblem& problem, const LimitSolution& u,
                                   const DirectionSet& directions) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  FarField far;
  far.incident_direction = u.incident_direction;
  far.directions = directions;
  far.background = VectorXc::Zero(directions.size());
  far.values.resize(directions.size());
  const VectorXc src = (medium.q0() + problem.p).cwiseProduct(u.values);
  const double scale = -grid.cell_volume() / (4.0 * kPi);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < directions.size(); ++b) {
    const Vec3 beta = directions.directions.col(b);
    Complex acc = 0.0;
    for (Index i = 0; i < grid.size(); ++i) {
      if (src(i) != Complex(0.0)) acc += std::exp(-kI * medium.k() * beta.dot(grid.node(i))) * src(i);
    }
    far.values(b) = scale * acc;
  }
  return far;
}

namespace {

// F_p = Σ_j β_pj ∂_j𝒰 ν, stored column-wise.
Eigen::MatrixX3cd dipole_flux(const HardLimitProblem& problem, const VectorXc& field) {
  const Eigen::MatrixX3cd grad = fd_gradient(problem.medium.grid(), field);
  Eigen::MatrixX3cd flux = Eigen::MatrixX3cd::Zero(grad.rows(), 3);
  for (Index i = 0; i < grad.rows(); ++i) {
    if (problem.nu(i) == 0.0) continue;
    flux.row(i) = (problem.beta_at(i).cast<Complex>() * grad.row(i).transpose()).transpose() * problem.nu(i);
  }
  return flux;
}

}  // namespace

VectorXc hard_source(const HardLimitProblem& problem, const VectorXc& field) {
  const Grid& grid = problem.medium.grid();
  const VectorXc lap = fd_laplacian(grid, field);
  const VectorXc div = fd_divergence(grid, dipole_flux(problem, field));
  return lap.cwiseProduct(problem.nu.cast<Complex>()) + div;
}

VectorXc hard_limit_step(const HardLimitProblem& problem, const VectorXc& u0, const VectorXc& field) {
  const VolumeKernel& K = free_kernel_table(problem.medium);
  return u0 + apply_green(problem.medium, K, hard_source(problem, field));
}

VectorXc hard_limit_step_gradient_form(const HardLimitProblem& problem, const VectorXc& u0, const VectorXc& field) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  const VolumeKernel& K = free_kernel_table(medium);
  const VectorXc mono = apply_green(medium, K, fd_laplacian(grid, field).cwiseProduct(problem.nu.cast<Complex>()));
  VectorXc dip = K.apply_grad_y(dipole_flux(problem, field));
  if (!medium.is_free()) dip = medium.background_solver().solve(dip);
  return u0 + mono - dip;
}

VectorXc born_first_iterate(const HardLimitProblem& problem, const Vec3& alpha) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  const VectorXc u0 = medium.incident_on_grid(alpha);
  const VectorXc nu = problem.nu.cast<Complex>();
  const Eigen::MatrixX3cd grad = fd_gradient(grid, u0);
  Eigen::MatrixX3cd F = Eigen::MatrixX3cd::Zero(grid.size(), 3);
  for (Index i = 0; i < grid.size(); ++i) {
    if (problem.nu(i) != 0.0) {
      F.row(i) = (problem.beta_at(i).cast<Complex>() * grad.row(i).transpose()).transpose() * problem.nu(i);
    }
  }
  const VectorXc f = fd_laplacian(grid, u0).cwiseProduct(nu) + fd_divergence(grid, F);
  return u0 + apply_green(medium, free_kernel_table(medium), f);
}

VectorXc born_first_iterate_substituted(const HardLimitProblem& problem, const Vec3& alpha) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  const double k = medium.k();
  const VectorXc u0 = medium.incident_on_grid(alpha);
  const Eigen::MatrixX3cd grad = fd_gradient(grid, u0);
  Eigen::MatrixX3cd F = Eigen::MatrixX3cd::Zero(grid.size(), 3);
  for (Index i = 0; i < grid.size(); ++i) {
    if (problem.nu(i) != 0.0) {
      F.row(i) = (problem.beta_at(i).cast<Complex>() * grad.row(i).transpose()).transpose() * problem.nu(i);
    }
  }
  const VectorXc mono = (-k * k) * medium.n0().cwiseProduct(u0).cwiseProduct(problem.nu.cast<Complex>());
  return u0 + apply_green(medium, free_kernel_table(medium), mono + fd_divergence(grid, F));
}

LimitSolution solve_hard_limit(const HardLimitProblem& problem, const Vec3& alpha, int max_iter, double tol) {
  require_unit(alpha, "solve_hard_limit");
  LimitSolution out;
  out.incident_direction = alpha;
  const VectorXc u0 = problem.medium.incident_on_grid(alpha);
  VectorXc current = u0;
  int growth = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXc next = hard_limit_step(problem, u0, current);
    const double norm = next.norm();
    const double change = norm > 0.0 ? (next - current).norm() / norm : 0.0;
    if (!out.changes.empty() && change > out.changes.back()) {
      if (++growth >= 3) {
        std::ostringstream msg;
        msg << "non-contraction: hard-limit iteration change grew for 3 consecutive iterations, now "
            << change << "; reduce nu";
        throw SolverFailure(msg.str());
      }
    } else {
      growth = 0;
    }
    out.changes.push_back(change);
    current = std::move(next);
    out.stats.iterations = it + 1;
    out.stats.residual = change;
    out.stats.direct = false;
    if (change <= tol) {
      out.values = std::move(current);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "hard-limit iteration did not reach tolerance " << tol << " in " << max_iter
      << " iterations (last change " << out.stats.residual << ")";
  throw SolverFailure(msg.str());
}

ComplexField evaluate_hard_limit(const HardLimitProblem& problem, const LimitSolution& u, const Points& points) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  const double k = medium.k();
  const VectorXc f = hard_source(problem, u.values);
  // w = ∫G f on the grid; off the grid w(x) = Σ g̃(x,z)[f - q₀ w] h³.
  VectorXc density = f;
  if (!medium.is_free()) {
    const VectorXc w = apply_green(medium, free_kernel_table(medium), f);
    density -= medium.q0().cwiseProduct(w);
  }
  density *= grid.cell_volume();
  ComplexField out = incident_field(medium, u.incident_direction, points);
  std::vector<Index> support;
  for (Index i = 0; i < density.size(); ++i) {
    if (density(i) != Complex(0.0)) support.push_back(i);
  }
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < points.cols(); ++p) {
    Complex acc = 0.0;
    for (Index l : support) acc += regularized_kernel(grid, k, points.col(p), l) * density(l);
    out.values(p) += acc;
  }
  return out;
}

FarField hard_limit_amplitude(const HardLimitProblem& problem, const LimitSolution& u,
                              const DirectionSet& directions) {
  const BackgroundMedium& medium = problem.medium;
  const Grid& grid = medium.grid();
  FarField far;
  far.incident_direction = u.incident_direction;
  far.directions = directions;
  far.background = background_amplitude(medium, u.incident_direction, directions);
  far.values = far.background;
  const VectorXc f = hard_source(problem, u.values);
  const double scale = grid.cell_volume() / (4.0 * kPi);
  for (Index b = 0; b < directions.size(); ++b) {
    const VectorXc u0 = medium.incident_on_grid(-Vec3(directions.directions.col(b)));
    far.values(b) += scale * u0.cwiseProduct(f).sum();
  }
  return far;
}

}  // namespace smallbody
