#include "smallbody/medium.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

namespace smallbody {

void require_unit(const Vec3& direction, const char* what) {
  if (!(std::abs(direction.norm() - 1.0) <= 1e-12)) {
    std::ostringstream msg;
    msg << what << ": direction must be a unit vector (|α| = " << direction.norm() << ")";
    throw SchemaError(msg.str());
  }
}

void ComplexField::validate() const {
  if (points.cols() != values.size()) throw SchemaError("ComplexField: points and values differ in length");
  require_unit(incident_direction, "ComplexField");
}

struct BackgroundMedium::Cache {
  std::once_flag once;
  std::unique_ptr<LippmannSchwinger> solver;
};

BackgroundMedium::BackgroundMedium(double k, const Region& domain, const Grid& grid, VectorXc n0,
                                   SolverOptions options)
    : k_(k), domain_(domain), grid_(grid), n0_(std::move(n0)), options_(options),
      cache_(std::make_shared<Cache>()) {
  if (!(k > 0.0)) throw SchemaError("BackgroundMedium: wavenumber must be positive");
  if (n0_.size() != grid_.size()) throw SchemaError("BackgroundMedium: n0 size does not match grid");
  inside_.resize(std::size_t(grid_.size()));
  q0_.resize(grid_.size());
  for (Index i = 0; i < grid_.size(); ++i) {
    const bool in = domain_.contains(grid_.node(i));
    inside_[std::size_t(i)] = in;
    if (!in && n0_(i) != Complex(1.0)) {
      std::ostringstream msg;
      msg << "BackgroundMedium: n0 must equal 1 outside D (node " << i << ")";
      throw InvariantViolation(msg.str());
    }
    q0_(i) = n0_(i) == Complex(1.0) ? Complex(0.0) : k * k * (1.0 - n0_(i));
    if (q0_(i).imag() > 0.0) {
      std::ostringstream msg;
      msg << "BackgroundMedium: Im q0 > 0 at node " << i << " (requires Im n0 >= 0)";
      throw InvariantViolation(msg.str());
    }
  }
  free_ = (q0_.array() == Complex(0.0)).all();
}

BackgroundMedium BackgroundMedium::homogeneous(double k, const Region& domain, const Grid& grid,
                                               SolverOptions options) {
  return BackgroundMedium(k, domain, grid, VectorXc::Ones(grid.size()), options);
}

Complex BackgroundMedium::q0_at(const Vec3& x) const {
  const auto cell = grid_.cell_of(x);
  return cell ? q0_(*cell) : Complex(0.0);
}

const LippmannSchwinger& BackgroundMedium::background_solver() const {
  std::call_once(cache_->once, [this] {
    cache_->solver = std::make_unique<LippmannSchwinger>(grid_, k_, q0_, options_);
  });
  return *cache_->solver;
}

VectorXc BackgroundMedium::incident_on_grid(const Vec3& alpha) const {
  require_unit(alpha, "incident_on_grid");
  VectorXc plane(grid_.size());
  for (Index i = 0; i < grid_.size(); ++i) plane(i) = std::exp(kI * k_ * alpha.dot(grid_.node(i)));
  if (free_) return plane;
  return background_solver().solve(plane);
}

Complex regularized_kernel(const Grid& grid, double k, const Vec3& x, Index node) {
  const Vec3 z = grid.node(node);
  if ((x - z).norm() <= 1e-12 * grid.spacing()) return cube_self_integral(grid.spacing(), k) / grid.cell_volume();
  return free_kernel(x, z, k);
}

CVec3 regularized_kernel_grad_x(const Grid& grid, double k, const Vec3& x, Index node) {
  const Vec3 z = grid.node(node);
  if ((x - z).norm() <= 1e-12 * grid.spacing()) return CVec3::Zero();
  return free_kernel_grad_x<double>(x, z, k);
}

GreenCoupling::GreenCoupling(const BackgroundMedium& medium, const Points& sources, bool with_gradients)
    : medium_(&medium), sources_(sources), gradients_(with_gradients) {
  if (medium.is_free()) return;
  const LippmannSchwinger& solver = medium.background_solver();
  const Grid& grid = medium.grid();
  const double k = medium.k();
  active_ = solver.active();
  const Index n = Index(active_.size());
  weights_.resize(n);
  for (Index a = 0; a < n; ++a) weights_(a) = medium.q0()(active_[a]) * grid.cell_volume();
  const Index m = sources.cols();
  columns_.resize(n, m);
  if (gradients_) {
    for (auto& c : grad_columns_) c.resize(n, m);
  }
  for (Index s = 0; s < m; ++s) {
    const Vec3 y = sources.col(s);
    VectorXc rhs(n);
    Eigen::MatrixX3cd grad_rhs(n, 3);
    for (Index a = 0; a < n; ++a) {
      rhs(a) = regularized_kernel(grid, k, y, active_[a]);
      if (gradients_) grad_rhs.row(a) = regularized_kernel_grad_x(grid, k, y, active_[a]).transpose();
    }
    columns_.col(s) = solver.solve_active(rhs);
    if (gradients_) {
      for (int p = 0; p < 3; ++p) grad_columns_[p].col(s) = solver.solve_active(grad_rhs.col(p));
    }
  }
}

Complex GreenCoupling::value(const Vec3& x, Index m) const {
  const Vec3 y = sources_.col(m);
  Complex out = free_kernel(x, y, medium_->k());
  if (medium_->is_free()) return out;
  const Grid& grid = medium_->grid();
  for (Index a = 0; a < Index(active_.size()); ++a) {
    out -= regularized_kernel(grid, medium_->k(), x, active_[a]) * weights_(a) * columns_(a, m);
  }
  return out;
}

CVec3 GreenCoupling::grad_y(const Vec3& x, Index m) const {
  const Vec3 y = sources_.col(m);
  CVec3 out = free_kernel_grad_y<double>(x, y, medium_->k());
  if (medium_->is_free()) return out;
  if (!gradients_) throw Error("GreenCoupling: gradients were not precomputed");
  const Grid& grid = medium_->grid();
  for (Index a = 0; a < Index(active_.size()); ++a) {
    const Complex gw = regularized_kernel(grid, medium_->k(), x, active_[a]) * weights_(a);
    for (int p = 0; p < 3; ++p) out(p) -= gw * grad_columns_[p](a, m);
  }
  return out;
}

CVec3 GreenCoupling::grad_x(const Vec3& x, Index m) const {
  const Vec3 y = sources_.col(m);
  CVec3 out = free_kernel_grad_x<double>(x, y, medium_->k());
  if (medium_->is_free()) return out;
  const Grid& grid = medium_->grid();
  for (Index a = 0; a < Index(active_.size()); ++a) {
    out -= regularized_kernel_grad_x(grid, medium_->k(), x, active_[a]) * (weights_(a) * columns_(a, m));
  }
  return out;
}

CMat3 GreenCoupling::hessian_xy(const Vec3& x, Index m) const {
  const Vec3 y = sources_.col(m);
  CMat3 out = free_kernel_hessian_xy<double>(x, y, medium_->k());
  if (medium_->is_free()) return out;
  if (!gradients_) throw Error("GreenCoupling: gradients were not precomputed");
  const Grid& grid = medium_->grid();
  for (Index a = 0; a < Index(active_.size()); ++a) {
    const CVec3 gx = regularized_kernel_grad_x(grid, medium_->k(), x, active_[a]) * weights_(a);
    for (int p = 0; p < 3; ++p) out.col(p) -= gx * grad_columns_[p](a, m);
  }
  return out;
}

Complex background_green(const BackgroundMedium& medium, const Vec3& x, const Vec3& y) {
  if (medium.is_free()) return free_kernel(x, y, medium.k());
  Points src(3, 1);
  src.col(0) = y;
  return GreenCoupling(medium, src).value(x, 0);
}

CVec3 background_green_grad(const BackgroundMedium& medium, const Vec3& x, const Vec3& y) {
  if (medium.is_free()) return free_kernel_grad_y<double>(x, y, medium.k());
  Points src(3, 1);
  src.col(0) = y;
  return GreenCoupling(medium, src, true).grad_y(x, 0);
}

ComplexField incident_field(const BackgroundMedium& medium, const Vec3& alpha, const Points& points) {
  require_unit(alpha, "incident_field");
  const double k = medium.k();
  ComplexField out{points, VectorXc(points.cols()), alpha};
  for (Index p = 0; p < points.cols(); ++p) out.values(p) = std::exp(kI * k * alpha.dot(points.col(p)));
  if (medium.is_free()) return out;
  const VectorXc grid_values = medium.incident_on_grid(alpha);
  const Grid& grid = medium.grid();
  const auto& active = medium.background_solver().active();
  for (Index p = 0; p < points.cols(); ++p) {
    Complex acc = 0.0;
    for (Index l : active) {
      acc += regularized_kernel(grid, k, points.col(p), l) * medium.q0()(l) * grid_values(l);
    }
    out.values(p) -= acc * grid.cell_volume();
  }
  return out;
}

CPoints incident_gradient(const BackgroundMedium& medium, const Vec3& alpha, const Points& points) {
  require_unit(alpha, "incident_gradient");
  const double k = medium.k();
  CPoints out(3, points.cols());
  for (Index p = 0; p < points.cols(); ++p) {
    out.col(p) = (kI * k) * alpha.cast<Complex>() * std::exp(kI * k * alpha.dot(points.col(p)));
  }
  if (medium.is_free()) return out;
  const VectorXc grid_values = medium.incident_on_grid(alpha);
  const Grid& grid = medium.grid();
  const auto& active = medium.background_solver().active();
  for (Index p = 0; p < points.cols(); ++p) {
    CVec3 acc = CVec3::Zero();
    for (Index l : active) {
      acc += regularized_kernel_grad_x(grid, k, points.col(p), l) * (medium.q0()(l) * grid_values(l));
    }
    out.col(p) -= acc * grid.cell_volume();
  }
  return out;
}

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

LemmaBoundsReport lemma_bounds_check(const BackgroundMedium& medium, double a, double d, int sample_count,
                                     std::uint64_t seed) {
  if (!(a > 0.0) || !(d >= 10.0 * a)) throw InvariantViolation("lemma_bounds_check: requires a > 0 and d >= 10a");
  const double k = medium.k();
  const double scale = a / (d * d) + k * a / d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box box = medium.domain().bounds();

  LemmaBoundsReport report{a, d, sample_count};
  for (int s = 0; s < sample_count; ++s) {
    Vec3 x;
    do {
      x = box.lo + box.size().cwiseProduct(Vec3(unit(rng), unit(rng), unit(rng)));
    } while (!medium.domain().contains(x));
    const Vec3 t = x + a * unit(rng) * random_unit(rng);
    const Vec3 y = x + d * (1.0 + unit(rng)) * random_unit(rng);

    const double dg = std::abs(free_kernel(t, y, k) - free_kernel(x, y, k));
    report.max_g_difference = std::max(report.max_g_difference, dg);
    report.max_g_ratio = std::max(report.max_g_ratio, dg / scale);

    double dG = dg;
    if (!medium.is_free()) {
      Points src(3, 1);
      src.col(0) = y;
      const GreenCoupling green(medium, src);
      dG = std::abs(green.value(t, 0) - green.value(x, 0));
    }
    report.max_green_difference = std::max(report.max_green_difference, dG);
    report.max_green_ratio = std::max(report.max_green_ratio, dG / scale);
  }
  return report;
}

}  // namespace smallbody
