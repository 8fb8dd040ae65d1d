#include "smallbody/designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smallbody {

DesignSpec::DesignSpec(BackgroundMedium m, VectorXc n, double radius, ShapeConstants s, LatticeOptions l)
    : medium(std::move(m)), target_n(std::move(n)), a(radius), shape(s), lattice(l) {
  if (target_n.size() != medium.grid().size()) throw SchemaError("target n must be sampled on the medium grid");
  if (!(a > 0.0)) throw SchemaError("particle radius must be positive");
  for (Index i = 0; i < target_n.size(); ++i) {
    std::ostringstream msg;
    if (!medium.inside()[std::size_t(i)] && target_n(i) != medium.n0()(i)) {
      msg << "target n must equal n0 outside D (node " << i << ")";
      throw InvariantViolation(msg.str());
    }
    if (target_n(i) != medium.n0()(i) && target_n(i).imag() < 0.0) {
      msg << "Im n < 0 at node " << i << " (targets must be absorptive or lossless)";
      throw InvariantViolation(msg.str());
    }
  }
}

char branch_letter(DesignBranch b) { return "ABCDE"[int(b)]; }

VectorXc target_to_potential(const DesignSpec& spec) {
  const double k2 = spec.medium.k() * spec.medium.k();
  return k2 * (spec.medium.n0() - spec.target_n);
}

HNChoice choose_h_N(const VectorXc& p, const ShapeConstants& shape) {
  const double kappa = shape.impedance_factor();
  HNChoice out;
  const Index n = p.size();
  out.h.resize(n);
  out.N.resize(n);
  out.branches.resize(std::size_t(n));
  std::vector<Index> bad;
  for (Index i = 0; i < n; ++i) {
    const double p1 = p(i).real(), p2 = p(i).imag();
    Complex h;
    double N;
    DesignBranch b;
    if (p2 > 0.0) {
      bad.push_back(i);
      continue;
    }
    if (p1 == 0.0 && p2 == 0.0) {
      b = DesignBranch::D;
      h = 0.0;
      N = 0.0;
    } else if (p2 == 0.0 && p1 > 0.0) {
      b = DesignBranch::B;
      h = 1.0;
      N = 2.0 * p1 / kappa;
    } else if (p2 == 0.0) {
      b = DesignBranch::C;
      h = -0.5;
      N = -p1 / kappa;
    } else if (p1 > 0.0) {
      b = DesignBranch::A;
      h = Complex(0.0, p1 / p2);
      N = (p1 * p1 + p2 * p2) / (kappa * p1);
    } else {
      b = DesignBranch::E;
      const double r = p1 / p2;
      const double h2 = -0.5 / (r + std::sqrt(r * r + 1.0));
      h = Complex(-0.5, h2);
      N = p2 * (0.25 + h2 * h2) / (kappa * h2);
      out.extrapolated = true;
    }
    if (!(N >= 0.0) || h.imag() > 0.0) {
      bad.push_back(i);
      continue;
    }
    out.h(i) = h;
    out.N(i) = N;
    out.branches[std::size_t(i)] = b;
    if (N > 0.0) {
      const Complex back = kappa * N * h / (1.0 + h);
      const double err = std::abs(back - p(i)) / std::abs(p(i));
      out.max_round_trip_error = std::max(out.max_round_trip_error, err);
      if (err > 1e-12) bad.push_back(i);
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "no admissible (h, N) at " << bad.size() << " node(s) (requires Im p <= 0); first nodes:";
    for (std::size_t j = 0; j < std::min<std::size_t>(bad.size(), 8); ++j) msg << " " << bad[j];
    throw InvariantViolation(msg.str());
  }
  return out;
}

DesignResult realize(const DesignSpec& spec, const HNChoice& choice) {
  DesignResult r;
  r.p = target_to_potential(spec);
  r.h = choice.h;
  r.N = choice.N;
  r.branches = choice.branches;
  r.cloud = build_cloud_impedance(spec.medium, spec.a, choice.h, choice.N, spec.shape, spec.lattice);
  const CloudValidation v = validate_cloud(r.cloud, spec.medium, spec.lattice);
  Feasibility& f = r.feasibility;
  f.ka = spec.medium.k() * spec.a;
  f.particles = r.cloud.size();
  f.spacing_over_a = v.spacing_over_a;
  f.volume_fraction = v.volume_fraction;
  f.cell_nodes = r.cloud.lattice.cell_nodes;
  f.cell_size = r.cloud.lattice.cell_size;
  f.extrapolated = choice.extrapolated;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (const auto& c : r.cloud.lattice.cells) {
    f.max_cell_count = std::max(f.max_cell_count, c.count);
    if (c.count > 0) min_spacing = std::min(min_spacing, c.spacing);
  }
  f.min_cell_spacing_over_a = std::isfinite(min_spacing) ? min_spacing / spec.a : 0.0;
  return r;
}

DesignResult design(const DesignSpec& spec) { return realize(spec, choose_h_N(target_to_potential(spec), spec.shape)); }

DesignVerification verify_design(const DesignResult& result, const DesignSpec& spec, const Vec3& alpha,
                                 const std::vector<double>& a_sequence, const Points& probes) {
  DesignVerification v;
  v.study = run_impedance_study(spec.medium, result.h, result.N, a_sequence, alpha, probes, spec.shape, spec.lattice);
  v.decreasing = v.study.strictly_decreasing || v.study.exact;
  v.final_error = v.study.scales.empty() ? 0.0 : v.study.scales.back().max_error;
  v.extrapolated = std::any_of(result.branches.begin(), result.branches.end(),
                               [](DesignBranch b) { return b == DesignBranch::E; });
  v.success = v.study.complete && v.decreasing && v.final_error <= 0.05;
  return v;
}

}  // namespace smallbody
