#include "smallbody/convergence.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace smallbody {

double CountingPair::relative_difference() const {
  const double scale = std::max(std::abs(integral), std::abs(particle_sum));
  return scale > 0.0 ? std::abs(particle_sum - integral) / scale : 0.0;
}

CountingPair counting_measure_check(const ParticleCloud& cloud, const Grid& grid, const Eigen::VectorXd& density,
                                    const std::function<double(const Vec3&)>& f, const Exclusion& exclusion) {
  if (density.size() != grid.size()) throw SchemaError("counting_measure_check: density must be sampled on the grid");
  const auto excluded = [&](const Vec3& x) {
    return exclusion.radius > 0.0 && (x - exclusion.center).norm() < exclusion.radius;
  };
  const double weight = cloud.kind == ParticleKind::Impedance ? cloud.a : cloud.shape.volume(cloud.a);
  CountingPair out;
  for (Index m = 0; m < cloud.size(); ++m) {
    const Vec3 x = cloud.centers.col(m);
    if (!excluded(x)) out.particle_sum += f(x);
  }
  out.particle_sum *= weight;
  for (Index i = 0; i < grid.size(); ++i) {
    if (density(i) == 0.0) continue;
    const Vec3 z = grid.node(i);
    if (!excluded(z)) out.integral += f(z) * density(i);
  }
  out.integral *= grid.cell_volume();
  return out;
}

Points far_probes(const Region& domain) {
  Points probes(3, 26);
  const double R = 5.0 * domain.diameter();
  const Vec3 c = domain.center();
  Index n = 0;
  for (int z = -1; z <= 1; ++z)
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x) {
        if (x == 0 && y == 0 && z == 0) continue;
        probes.col(n++) = c + R * Vec3(x, y, z).normalized();
      }
  return probes;
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::pair<double, double> relative_errors(const VectorXc& discrete, const VectorXc& reference) {
  double mx = 0.0, sq = 0.0;
  for (Index i = 0; i < reference.size(); ++i) {
    const double e = std::abs(discrete(i) - reference(i)) / std::abs(reference(i));
    mx = std::max(mx, e);
    sq += e * e;
  }
  return {mx, reference.size() > 0 ? std::sqrt(sq / double(reference.size())) : 0.0};
}

namespace {

void require_decreasing(const std::vector<double>& a_sequence) {
  if (a_sequence.empty()) throw SchemaError("scale study needs at least one radius");
  for (std::size_t i = 0; i < a_sequence.size(); ++i) {
    if (!(a_sequence[i] > 0.0)) throw SchemaError("radii must be positive");
    if (i > 0 && !(a_sequence[i] < a_sequence[i - 1])) throw SchemaError("a_sequence must be strictly decreasing");
  }
}

std::function<double(const Vec3&)> smooth_test_function(const Region& domain) {
  const Vec3 c = domain.center();
  const double L = domain.diameter();
  return [c, L](const Vec3& x) {
    const Vec3 s = (x - c) / L;
    return 1.0 + 0.5 * std::cos(2.0 * s.x() + 3.0 * s.y() - s.z()) + s.squaredNorm();
  };
}

void summarize(ScaleStudy& study) {
  std::vector<double> a, M, Q, e;
  study.complete = true;
  study.strictly_decreasing = true;
  study.exact = !study.scales.empty();
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : study.scales) {
    if (!s.failure.empty()) {
      study.complete = false;
      study.strictly_decreasing = false;
      study.exact = false;
      continue;
    }
    if (!(s.max_error < prev)) study.strictly_decreasing = false;
    if (!(s.max_error <= 1e-13)) study.exact = false;
    prev = s.max_error;
    if (s.particles > 0) {
      a.push_back(s.a);
      M.push_back(double(s.particles));
      Q.push_back(s.max_charge);
      e.push_back(std::max(s.max_error, 1e-300));
    }
  }
  study.exponent_particles = fit_exponent(a, M);
  study.exponent_charge = fit_exponent(a, Q);
  study.exponent_error = fit_exponent(a, e);
}

}  // namespace

ScaleStudy run_impedance_study(const BackgroundMedium& medium, const VectorXc& h, const Eigen::VectorXd& N,
                               const std::vector<double>& a_sequence, const Vec3& alpha, const Points& probes,
                               const ShapeConstants& shape, const LatticeOptions& lattice) {
  require_decreasing(a_sequence);
  require_unit(alpha, "run_impedance_study");
  ScaleStudy study;
  study.mode = StudyMode::Impedance;
  study.incident_direction = alpha;
  study.probes = probes;

  const ImpedanceLimitProblem limit(medium, potential_from_h_N(h, N, shape));
  const LimitSolution u = solve_impedance_limit(limit, alpha);
  const VectorXc reference = evaluate_impedance_limit(limit, u, probes).values;
  Points forward(3, 1);
  forward.col(0) = alpha;
  const DirectionSet fwd = direction_list(forward);
  const Complex forward_limit = limiting_amplitude(limit, u, fwd).values(0);
  const auto smooth = smooth_test_function(medium.domain());

  for (double a : a_sequence) {
    ScaleRecord rec;
    rec.a = a;
    rec.forward_limit = forward_limit;
    try {
      const ParticleCloud cloud = build_cloud_impedance(medium, a, h, N, shape, lattice);
      rec.particles = cloud.size();
      rec.d = cloud.d;
      rec.cell_size = cloud.lattice.cell_size;
      rec.count_unit = counting_measure_check(cloud, medium.grid(), N, [](const Vec3&) { return 1.0; });
      rec.count_smooth = counting_measure_check(cloud, medium.grid(), N, smooth);
      const ImpedanceSolveResult sol = assemble_and_solve(medium, cloud, alpha);
      rec.residual = sol.stats.residual;
      rec.max_charge = sol.charges.size() ? sol.charges.cwiseAbs().maxCoeff() : 0.0;
      const VectorXc uM = evaluate_field(sol, medium, cloud, probes).values;
      std::tie(rec.max_error, rec.rms_error) = relative_errors(uM, reference);
      rec.forward_discrete = far_field(sol, medium, cloud, fwd).values(0);
    } catch (const Error& e) {
      rec.failure = e.what();
    }
    study.scales.push_back(rec);
  }
  summarize(study);
  return study;
}

ScaleStudy run_hard_study(const BackgroundMedium& medium, const Eigen::VectorXd& nu, const Mat3& beta,
                          const std::vector<double>& a_sequence, const Vec3& alpha, const Points& probes,
                          const ShapeConstants& shape, const LatticeOptions& lattice) {
  require_decreasing(a_sequence);
  require_unit(alpha, "run_hard_study");
  ScaleStudy study;
  study.mode = StudyMode::Hard;
  study.incident_direction = alpha;
  study.probes = probes;

  const HardLimitProblem limit(medium, nu, {beta});
  const LimitSolution u = solve_hard_limit(limit, alpha);
  const VectorXc reference = evaluate_hard_limit(limit, u, probes).values;
  Points forward(3, 1);
  forward.col(0) = alpha;
  const DirectionSet fwd = direction_list(forward);
  const Complex forward_limit = hard_limit_amplitude(limit, u, fwd).values(0);
  const auto smooth = smooth_test_function(medium.domain());

  for (double a : a_sequence) {
    ScaleRecord rec;
    rec.a = a;
    rec.forward_limit = forward_limit;
    try {
      const ParticleCloud cloud = build_cloud_hard(medium, a, nu, beta, shape, lattice);
      rec.particles = cloud.size();
      rec.d = cloud.d;
      rec.cell_size = cloud.lattice.cell_size;
      rec.count_unit = counting_measure_check(cloud, medium.grid(), nu, [](const Vec3&) { return 1.0; });
      rec.count_smooth = counting_measure_check(cloud, medium.grid(), nu, smooth);
      const HardSolveResult sol = assemble_and_solve_hard(medium, cloud, alpha);
      rec.residual = sol.stats.residual;
      rec.max_charge = sol.charges.size() ? sol.charges.cwiseAbs().maxCoeff() : 0.0;
      const VectorXc uM = evaluate_field_hard(sol, medium, cloud, probes).values;
      std::tie(rec.max_error, rec.rms_error) = relative_errors(uM, reference);
      rec.forward_discrete = far_field_hard(sol, medium, cloud, fwd).values(0);
    } catch (const Error& e) {
      rec.failure = e.what();
    }
    study.scales.push_back(rec);
  }
  summarize(study);
  return study;
}

}  // namespace smallbody
