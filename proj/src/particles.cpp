#include "smallbody/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace smallbody {

bool operator==(const ShapeConstants& a, const ShapeConstants& b) {
  return a.c1 == b.c1 && a.c2 == b.c2 && a.c3 == b.c3;
}

Mat3 ball_polarizability() { return -1.5 * Mat3::Identity(); }

Complex impedance_from_h(Complex h, double a, const ShapeConstants& shape) {
  return 4.0 * kPi * shape.c1 * h / (shape.c2 * a);
}

Complex h_from_impedance(Complex zeta, double a, const ShapeConstants& shape) {
  return zeta * shape.c2 * a / (4.0 * kPi * shape.c1);
}

double min_pairwise_distance(const Points& centers, Index* first, Index* second) {
  const Index n = centers.cols();
  if (n < 2) return std::numeric_limits<double>::infinity();
  const Vec3 lo = centers.rowwise().minCoeff();
  const Vec3 hi = centers.rowwise().maxCoeff();
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
  double bucket = extent / std::cbrt(double(n));
  if (!(bucket > 0.0)) bucket = extent;
  for (;;) {
    std::unordered_map<std::int64_t, std::vector<Index>> table;
    const auto key = [&](const Eigen::Array3i& c) {
      return (std::int64_t(c(0)) * 2097152 + c(1)) * 2097152 + c(2);
    };
    const auto cell = [&](Index i) {
      return Eigen::Array3i(((centers.col(i) - lo) / bucket).array().floor().cast<int>());
    };
    for (Index i = 0; i < n; ++i) table[key(cell(i))].push_back(i);
    double best = std::numeric_limits<double>::infinity();
    Index bi = -1, bj = -1;
    for (Index i = 0; i < n; ++i) {
      const Eigen::Array3i c = cell(i);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const auto it = table.find(key(c + Eigen::Array3i(dx, dy, dz)));
            if (it == table.end()) continue;
            for (Index j : it->second) {
              if (j <= i) continue;
              const double r = (centers.col(i) - centers.col(j)).norm();
              if (r < best) {
                best = r;
                bi = i;
                bj = j;
              }
            }
          }
    }
    // Any pair closer than one bucket sits in neighbouring buckets.
    if (best <= bucket || bucket > 2.0 * extent) {
      if (first) *first = bi;
      if (second) *second = bj;
      return best;
    }
    bucket *= 2.0;
  }
}

namespace {

double cloud_spacing(const Points& centers, double a) {
  const double d = min_pairwise_distance(centers);
  return std::isfinite(d) ? d : 10.0 * a;
}

std::string cell_name(const Eigen::Array3i& block) {
  std::ostringstream s;
  s << "(" << block(0) << "," << block(1) << "," << block(2) << ")";
  return s.str();
}

struct Placement {
  Points centers;
  std::vector<Index> owner;  // cell index per particle
  LatticeReport report;
};

// Cells are B×B×B blocks of grid nodes. Each occupied cell gets round(measure)
// particles on a sub-lattice spanning the bounding box of its occupied nodes.
Placement place_on_lattice(const Grid& grid, const Eigen::VectorXd& weight, double per_particle, int cell_nodes,
                           Index max_particles) {
  const Eigen::Array3i dims = grid.dims();
  const int B = std::clamp(cell_nodes, 1, dims.maxCoeff());
  const Eigen::Array3i blocks = (dims + B - 1) / B;
  const double h = grid.spacing();

  Placement out;
  out.report.cell_nodes = B;
  out.report.cell_size = B * h;

  struct Pending {
    LatticeCell cell;
    Vec3 lo, hi;
  };
  std::vector<Pending> pending;
  Index total = 0;
  for (int bk = 0; bk < blocks(2); ++bk)
    for (int bj = 0; bj < blocks(1); ++bj)
      for (int bi = 0; bi < blocks(0); ++bi) {
        Pending p;
        p.cell.block = Eigen::Array3i(bi, bj, bk);
        double mass = 0.0;
        int nodes = 0;
        Eigen::Array3i lo_n = Eigen::Array3i::Constant(std::numeric_limits<int>::max());
        Eigen::Array3i hi_n = Eigen::Array3i::Constant(-1);
        for (int k = bk * B; k < std::min(dims(2), (bk + 1) * B); ++k)
          for (int j = bj * B; j < std::min(dims(1), (bj + 1) * B); ++j)
            for (int i = bi * B; i < std::min(dims(0), (bi + 1) * B); ++i) {
              ++nodes;
              const double w = weight(grid.index(i, j, k));
              if (w <= 0.0) continue;
              mass += w;
              lo_n = lo_n.min(Eigen::Array3i(i, j, k));
              hi_n = hi_n.max(Eigen::Array3i(i, j, k));
            }
        if (mass <= 0.0) continue;
        p.cell.volume = nodes * grid.cell_volume();
        p.cell.measure = mass * grid.cell_volume() / per_particle;
        p.cell.count = Index(std::llround(p.cell.measure));
        p.lo = grid.box().lo + h * lo_n.cast<double>().matrix();
        p.hi = grid.box().lo + h * (hi_n + 1).cast<double>().matrix();
        out.report.requested += p.cell.measure;
        out.report.rounding_discrepancy += std::abs(double(p.cell.count) - p.cell.measure);
        total += p.cell.count;
        if (total > max_particles) {
          std::ostringstream msg;
          msg << "particle count exceeds the cap of " << max_particles << " (reached at cell "
              << cell_name(p.cell.block) << "; total requested ≈ " << total << "+)";
          throw InfeasibleDensity(msg.str());
        }
        pending.push_back(p);
      }

  out.centers.resize(3, total);
  out.owner.reserve(std::size_t(total));
  Index next = 0;
  for (std::size_t c = 0; c < pending.size(); ++c) {
    Pending& p = pending[c];
    const Index n = p.cell.count;
    if (n > 0) {
      const Vec3 L = p.hi - p.lo;
      const double s = std::cbrt(L.prod() / double(n));
      Eigen::Array3i m;
      for (int ax = 0; ax < 3; ++ax) m(ax) = std::max(1, int(std::floor(L(ax) / s + 1e-9)));
      while (Index(m(0)) * m(1) * m(2) < n) {
        int ax = 0;
        for (int t = 1; t < 3; ++t) {
          if (L(t) / m(t) > L(ax) / m(ax)) ax = t;
        }
        ++m(ax);
      }
      const Index sites = Index(m(0)) * m(1) * m(2);
      const Vec3 step = L.cwiseQuotient(m.cast<double>().matrix());
      p.cell.spacing = step.minCoeff();
      for (Index t = 0; t < n; ++t) {
        const Index site = Index(std::floor((double(t) + 0.5) * double(sites) / double(n)));
        const Index ix = site % m(0);
        const Index iy = (site / m(0)) % m(1);
        const Index iz = site / (Index(m(0)) * m(1));
        out.centers.col(next++) = p.lo + step.cwiseProduct(Vec3(ix + 0.5, iy + 0.5, iz + 0.5));
        out.owner.push_back(Index(c));
      }
    }
    out.report.cells.push_back(p.cell);
  }
  return out;
}

// Smallest occupied-cell measure for blocks of B nodes.
double min_cell_measure(const Grid& grid, const Eigen::VectorXd& weight, double per_particle, int B) {
  const Eigen::Array3i dims = grid.dims();
  const Eigen::Array3i blocks = (dims + B - 1) / B;
  std::vector<double> mass(std::size_t(blocks.prod()), 0.0);
  for (Index n = 0; n < grid.size(); ++n) {
    if (weight(n) <= 0.0) continue;
    const Eigen::Array3i b = grid.ijk(n) / B;
    mass[std::size_t(b(0) + blocks(0) * (b(1) + blocks(1) * b(2)))] += weight(n);
  }
  double least = std::numeric_limits<double>::infinity();
  for (double m : mass) {
    if (m > 0.0) least = std::min(least, m * grid.cell_volume() / per_particle);
  }
  return least;
}

// Blocks start at the size that holds 27 particles at the peak density and grow
// until every occupied cell holds at least 27. Nodes are spread evenly over the
// blocks so no sliver cells remain at the edge.
int auto_cell_nodes(const Grid& grid, const Eigen::VectorXd& weight, double per_particle) {
  const double peak = weight.maxCoeff() / per_particle;
  if (!(peak > 0.0)) return 1;
  const int n = grid.dims().maxCoeff();
  const int target = std::clamp(int(std::ceil(std::cbrt(27.0 / peak) / grid.spacing() - 1e-9)), 1, n);
  int B = n;
  for (int blocks = std::max(1, n / target); blocks >= 1; --blocks) {
    B = (n + blocks - 1) / blocks;
    if (min_cell_measure(grid, weight, per_particle, B) >= 27.0) break;
  }
  return B;
}

void require_spacing(const Placement& placed, double a, const LatticeOptions& options, double* d_out) {
  Index i = -1, j = -1;
  const double d = min_pairwise_distance(placed.centers, &i, &j);
  *d_out = std::isfinite(d) ? d : 10.0 * a;
  if (std::isfinite(d) && d < options.min_spacing_ratio * a) {
    const LatticeCell& cell = placed.report.cells[std::size_t(placed.owner[std::size_t(i)])];
    std::ostringstream msg;
    msg << "infeasible density: cell " << cell_name(cell.block) << " needs " << cell.count
        << " particles, giving spacing d = " << d << " < " << options.min_spacing_ratio << "a = "
        << options.min_spacing_ratio * a;
    throw InfeasibleDensity(msg.str());
  }
}

void require_ka(double k, double a, const LatticeOptions& options) {
  if (!(a > 0.0)) throw SchemaError("particle radius must be positive");
  if (k * a > options.max_ka) {
    std::ostringstream msg;
    msg << "ka = " << k * a << " exceeds " << options.max_ka;
    throw InvariantViolation(msg.str());
  }
}

}  // namespace

ParticleCloud make_impedance_cloud(const Points& centers, double a, const VectorXc& h, const ShapeConstants& shape) {
  if (h.size() != centers.cols()) throw SchemaError("make_impedance_cloud: one h value per center required");
  ParticleCloud cloud;
  cloud.kind = ParticleKind::Impedance;
  cloud.centers = centers;
  cloud.a = a;
  cloud.shape = shape;
  cloud.h = h;
  cloud.zeta.resize(h.size());
  for (Index m = 0; m < h.size(); ++m) cloud.zeta(m) = impedance_from_h(h(m), a, shape);
  cloud.d = cloud_spacing(centers, a);
  return cloud;
}

ParticleCloud make_hard_cloud(const Points& centers, double a, const Mat3& beta, const ShapeConstants& shape) {
  ParticleCloud cloud;
  cloud.kind = ParticleKind::Hard;
  cloud.centers = centers;
  cloud.a = a;
  cloud.shape = shape;
  cloud.beta.assign(std::size_t(centers.cols()), beta);
  cloud.d = cloud_spacing(centers, a);
  return cloud;
}

ParticleCloud build_cloud_impedance(const BackgroundMedium& medium, double a, const VectorXc& h_field,
                                    const Eigen::VectorXd& N_field, const ShapeConstants& shape,
                                    const LatticeOptions& options) {
  const Grid& grid = medium.grid();
  if (h_field.size() != grid.size() || N_field.size() != grid.size()) {
    throw SchemaError("build_cloud_impedance: h and N must be sampled on the medium grid");
  }
  require_ka(medium.k(), a, options);
  for (Index i = 0; i < grid.size(); ++i) {
    std::ostringstream msg;
    if (!(N_field(i) >= 0.0)) {
      msg << "N < 0 at node " << i;
      throw InvariantViolation(msg.str());
    }
    if (h_field(i).imag() > 0.0) {
      msg << "Im h > 0 at node " << i;
      throw InvariantViolation(msg.str());
    }
    if (N_field(i) > 0.0) {
      if (!medium.inside()[std::size_t(i)]) {
        msg << "N > 0 outside D at node " << i;
        throw InvariantViolation(msg.str());
      }
      if (std::abs(1.0 + h_field(i)) < 1e-12) {
        msg << "h = -1 at node " << i << " where N > 0 (singular charge denominator)";
        throw InvariantViolation(msg.str());
      }
    }
  }
  const int B = options.cell_nodes > 0 ? options.cell_nodes : auto_cell_nodes(grid, N_field, a);
  Placement placed = place_on_lattice(grid, N_field, a, B, options.max_particles);

  ParticleCloud cloud;
  require_spacing(placed, a, options, &cloud.d);
  cloud.kind = ParticleKind::Impedance;
  cloud.a = a;
  cloud.shape = shape;
  cloud.centers = std::move(placed.centers);
  cloud.lattice = placed.report;

  const Index M = cloud.size();
  cloud.h.resize(M);
  cloud.zeta.resize(M);
  const int Bc = placed.report.cell_nodes;
  for (Index m = 0; m < M; ++m) {
    const Vec3 x = cloud.centers.col(m);
    const auto node = grid.cell_of(x);
    Complex h;
    if (node && N_field(*node) > 0.0) {
      h = h_field(*node);
    } else {
      // Fall back to the N-weighted mean over the particle's cell.
      const Eigen::Array3i blk = placed.report.cells[std::size_t(placed.owner[std::size_t(m)])].block;
      Complex acc = 0.0;
      double mass = 0.0;
      for (int k = blk(2) * Bc; k < std::min(grid.dims()(2), (blk(2) + 1) * Bc); ++k)
        for (int j = blk(1) * Bc; j < std::min(grid.dims()(1), (blk(1) + 1) * Bc); ++j)
          for (int i = blk(0) * Bc; i < std::min(grid.dims()(0), (blk(0) + 1) * Bc); ++i) {
            const Index n = grid.index(i, j, k);
            acc += N_field(n) * h_field(n);
            mass += N_field(n);
          }
      h = acc / mass;
    }
    cloud.h(m) = h;
    cloud.zeta(m) = impedance_from_h(h, a, shape);
  }
  return cloud;
}

ParticleCloud build_cloud_hard(const BackgroundMedium& medium, double a, const Eigen::VectorXd& nu_field,
                               const Mat3& beta, const ShapeConstants& shape, const LatticeOptions& options) {
  const Grid& grid = medium.grid();
  if (nu_field.size() != grid.size()) throw SchemaError("build_cloud_hard: nu must be sampled on the medium grid");
  require_ka(medium.k(), a, options);
  for (Index i = 0; i < grid.size(); ++i) {
    std::ostringstream msg;
    if (!(nu_field(i) >= 0.0)) {
      msg << "nu < 0 at node " << i;
      throw InvariantViolation(msg.str());
    }
    if (nu_field(i) > 0.0 && !medium.inside()[std::size_t(i)]) {
      msg << "nu > 0 outside D at node " << i;
      throw InvariantViolation(msg.str());
    }
    const double ratio = std::cbrt(nu_field(i) / shape.c3);
    if (ratio > 0.1) {
      msg << "hard-particle compatibility bound violated at node " << i << ": (nu/c3)^(1/3) = " << ratio
          << " > 0.1 (requires d > 10a)";
      throw InvariantViolation(msg.str());
    }
  }
  const int B = options.cell_nodes > 0 ? options.cell_nodes : auto_cell_nodes(grid, nu_field, shape.volume(a));
  Placement placed = place_on_lattice(grid, nu_field, shape.volume(a), B, options.max_particles);

  ParticleCloud cloud;
  require_spacing(placed, a, options, &cloud.d);
  cloud.kind = ParticleKind::Hard;
  cloud.a = a;
  cloud.shape = shape;
  cloud.centers = std::move(placed.centers);
  cloud.lattice = placed.report;
  cloud.beta.assign(std::size_t(cloud.size()), beta);
  return cloud;
}

CloudValidation validate_cloud(const ParticleCloud& cloud, const BackgroundMedium& medium,
                               const LatticeOptions& options) {
  CloudValidation r;
  r.particles = cloud.size();
  if (cloud.empty()) return r;
  const auto flag = [&](const std::string& s) { r.violations.push_back(s); };
  std::ostringstream msg;
  r.ka = medium.k() * cloud.a;
  if (!(cloud.a > 0.0)) flag("particle radius must be positive");
  if (r.ka > options.max_ka) {
    msg.str("");
    msg << "ka = " << r.ka << " exceeds " << options.max_ka;
    flag(msg.str());
  }
  const double d = min_pairwise_distance(cloud.centers);
  r.spacing_over_a = std::isfinite(d) ? d / cloud.a : cloud.d / cloud.a;
  if (r.spacing_over_a < options.min_spacing_ratio) {
    msg.str("");
    msg << "spacing violation: d/a = " << r.spacing_over_a << " < " << options.min_spacing_ratio;
    flag(msg.str());
  }
  if (r.particles > options.max_particles) flag("particle count exceeds the cap");
  for (Index m = 0; m < cloud.size(); ++m) {
    // D is resolved by cell-centre membership, so test the containing cell.
    const auto cell = medium.grid().cell_of(cloud.centers.col(m));
    if (!cell || !medium.inside()[std::size_t(*cell)]) {
      msg.str("");
      msg << "particle " << m << " lies outside D";
      flag(msg.str());
      break;
    }
  }
  if (cloud.kind == ParticleKind::Impedance) {
    if (cloud.zeta.size() != cloud.size()) {
      flag("impedance count does not match particle count");
    } else {
      for (Index m = 0; m < cloud.size(); ++m) {
        r.max_zeta_a = std::max(r.max_zeta_a, std::abs(cloud.zeta(m)) * cloud.a);
        if (cloud.zeta(m).imag() > 0.0) {
          msg.str("");
          msg << "Im zeta > 0 at particle " << m;
          flag(msg.str());
        }
        const Complex h = h_from_impedance(cloud.zeta(m), cloud.a, cloud.shape);
        if (std::abs(1.0 + h) < 1e-12) {
          msg.str("");
          msg << "h = -1 at particle " << m;
          flag(msg.str());
        }
      }
    }
  } else if (Index(cloud.beta.size()) != cloud.size()) {
    flag("polarizability count does not match particle count");
  }
  double occupied = 0.0;
  for (const auto& c : cloud.lattice.cells) occupied += c.volume;
  if (!(occupied > 0.0)) occupied = medium.domain().volume();
  r.volume_fraction = double(cloud.size()) * cloud.shape.volume(cloud.a) / occupied;
  return r;
}

void require_valid(const ParticleCloud& cloud, const BackgroundMedium& medium, const LatticeOptions& options) {
  const CloudValidation r = validate_cloud(cloud, medium, options);
  if (r.ok()) return;
  std::ostringstream msg;
  msg << "invalid particle cloud:";
  for (const auto& v : r.violations) msg << " " << v << ";";
  throw InvariantViolation(msg.str());
}

}  // namespace smallbody
