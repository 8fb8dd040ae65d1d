#include "smallbody/scene.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace smallbody {

namespace {

void allow_keys(const Json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw SchemaError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double positive(const Json& j, const char* what) {
  const double v = number_from_json(j);
  if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError(std::string(what) + " must be positive and finite");
  return v;
}

Vec3 direction_from_json(const Json& j, const char* what) {
  const Vec3 v = vec3_from_json(j);
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw SchemaError(std::string(what) + " must be a non-zero vector");
  return v / n;
}

std::vector<double> radii_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("a_sequence must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(positive(v, "a_sequence entries"));
  return out;
}

Complex outside_value(const Json& spec, Complex fallback) {
  return spec.contains("outside") ? complex_from_json(spec.at("outside")) : fallback;
}

VectorXc sample_radial(const Json& spec, const Grid& grid, Complex fallback) {
  allow_keys(spec, "radial field", {"type", "center", "radius", "profile", "outside"});
  const Vec3 c = vec3_from_json(spec.at("center"));
  const double radius = positive(spec.at("radius"), "radial field radius");
  const Json& prof = spec.at("profile");
  if (!prof.is_array() || prof.empty()) throw SchemaError("radial profile must be a non-empty array of [r, value]");
  std::vector<double> r;
  std::vector<Complex> v;
  for (const auto& row : prof) {
    if (!row.is_array() || row.size() != 2) throw SchemaError("radial profile rows must be [r, value]");
    r.push_back(number_from_json(row[0]));
    v.push_back(complex_from_json(row[1]));
    if (r.size() > 1 && !(r.back() > r[r.size() - 2])) throw SchemaError("radial profile radii must increase");
  }
  const Complex outside = outside_value(spec, fallback);
  VectorXc out(grid.size());
  for (Index n = 0; n < grid.size(); ++n) {
    const double s = (grid.node(n) - c).norm();
    if (s >= radius) {
      out(n) = outside;
    } else if (s <= r.front()) {
      out(n) = v.front();
    } else if (s >= r.back()) {
      out(n) = v.back();
    } else {
      const auto it = std::upper_bound(r.begin(), r.end(), s);
      const std::size_t i = std::size_t(it - r.begin());
      const double t = (s - r[i - 1]) / (r[i] - r[i - 1]);
      out(n) = (1.0 - t) * v[i - 1] + t * v[i];
    }
  }
  return out;
}

}  // namespace

Region region_from_json(const Json& j) {
  const std::string type = j.value("type", std::string("box"));
  if (type == "box") {
    allow_keys(j, "box region", {"type", "lo", "hi"});
    const Vec3 lo = vec3_from_json(j.at("lo"));
    const Vec3 hi = vec3_from_json(j.at("hi"));
    if (!(hi.array() > lo.array()).all()) throw SchemaError("box region: hi must exceed lo on every axis");
    return Region::box(lo, hi);
  }
  if (type == "ball") {
    allow_keys(j, "ball region", {"type", "center", "radius"});
    return Region::ball(vec3_from_json(j.at("center")), positive(j.at("radius"), "ball radius"));
  }
  throw SchemaError("region type must be 'box' or 'ball'");
}

VectorXc sample_field(const Json& spec, const Grid& grid, Complex fallback) {
  if (spec.is_number() || (spec.is_object() && spec.contains("re"))) {
    return VectorXc::Constant(grid.size(), complex_from_json(spec));
  }
  if (!spec.is_object() || !spec.contains("type")) throw SchemaError("field spec must be a number, {re,im} or typed object");
  const std::string type = spec.at("type").get<std::string>();
  if (type == "constant") {
    allow_keys(spec, "constant field", {"type", "value", "region", "outside"});
    const Complex value = complex_from_json(spec.at("value"));
    if (!spec.contains("region")) return VectorXc::Constant(grid.size(), value);
    const Region region = region_from_json(spec.at("region"));
    const Complex outside = outside_value(spec, fallback);
    VectorXc out(grid.size());
    for (Index n = 0; n < grid.size(); ++n) out(n) = region.contains(grid.node(n)) ? value : outside;
    return out;
  }
  if (type == "radial") return sample_radial(spec, grid, fallback);
  if (type == "gaussian") {
    allow_keys(spec, "gaussian field", {"type", "center", "width", "amplitude", "outside"});
    const Vec3 c = vec3_from_json(spec.at("center"));
    const double w = positive(spec.at("width"), "gaussian width");
    const Complex amp = complex_from_json(spec.at("amplitude"));
    const Complex base = outside_value(spec, fallback);
    VectorXc out(grid.size());
    for (Index n = 0; n < grid.size(); ++n) {
      out(n) = base + amp * std::exp(-(grid.node(n) - c).squaredNorm() / (w * w));
    }
    return out;
  }
  if (type == "table") {
    allow_keys(spec, "table field", {"type", "values"});
    VectorXc out = complex_vector_from_json(spec.at("values"));
    if (out.size() != grid.size()) {
      throw SchemaError("table field has " + std::to_string(out.size()) + " values, grid has " +
                        std::to_string(grid.size()) + " nodes");
    }
    return out;
  }
  throw SchemaError("unknown field type '" + type + "'");
}

Eigen::VectorXd sample_real_field(const Json& spec, const Grid& grid, double fallback) {
  const VectorXc v = sample_field(spec, grid, fallback);
  if ((v.imag().array() != 0.0).any()) throw SchemaError("field must be real");
  return v.real();
}

LatticeOptions lattice_from_json(const Json& j) {
  allow_keys(j, "lattice", {"cell_nodes", "max_particles", "min_spacing_ratio", "max_ka"});
  LatticeOptions o;
  if (j.contains("cell_nodes")) o.cell_nodes = j.at("cell_nodes").get<int>();
  if (j.contains("max_particles")) o.max_particles = j.at("max_particles").get<Index>();
  if (j.contains("min_spacing_ratio")) o.min_spacing_ratio = positive(j.at("min_spacing_ratio"), "min_spacing_ratio");
  if (j.contains("max_ka")) o.max_ka = positive(j.at("max_ka"), "max_ka");
  if (o.cell_nodes < 0) throw SchemaError("lattice cell_nodes must be >= 0");
  if (o.max_particles <= 0) throw SchemaError("lattice max_particles must be positive");
  return o;
}

namespace {

ShapeConstants shape_or_ball(const Json& j) {
  return j.contains("shape") ? shape_from_json(j.at("shape")) : ShapeConstants::ball();
}

LatticeOptions lattice_or_default(const Json& j) {
  return j.contains("lattice") ? lattice_from_json(j.at("lattice")) : LatticeOptions{};
}

BackgroundMedium parse_medium(const Json& j, const SolverOptions& solver) {
  allow_keys(j, "medium", {"k", "box", "resolution", "spacing", "domain", "n0"});
  const double k = positive(j.at("k"), "medium.k");
  const Json& b = j.at("box");
  allow_keys(b, "medium.box", {"lo", "hi"});
  const Box box{vec3_from_json(b.at("lo")), vec3_from_json(b.at("hi"))};
  if (!(box.hi.array() > box.lo.array()).all()) throw SchemaError("medium.box: hi must exceed lo on every axis");

  Grid grid;
  if (j.contains("resolution") == j.contains("spacing")) {
    throw SchemaError("medium needs exactly one of 'resolution' or 'spacing'");
  }
  if (j.contains("resolution")) {
    const Json& r = j.at("resolution");
    if (!r.is_array() || r.size() != 3) throw SchemaError("medium.resolution must hold three integers");
    grid = Grid(box, Eigen::Array3i(r[0].get<int>(), r[1].get<int>(), r[2].get<int>()));
  } else {
    grid = Grid::with_spacing(box, positive(j.at("spacing"), "medium.spacing"));
  }
  if (grid.size() > 200000) throw SchemaError("medium grid exceeds 200000 nodes");

  const Region domain = j.contains("domain") ? region_from_json(j.at("domain")) : Region::box(box.lo, box.hi);
  const VectorXc n0 = j.contains("n0") ? sample_field(j.at("n0"), grid, 1.0) : VectorXc::Ones(grid.size());
  return BackgroundMedium(k, domain, grid, n0, solver);
}

CloudSpec parse_cloud(const Json& j, const Grid& grid) {
  allow_keys(j, "cloud", {"kind", "a", "shape", "centers", "h", "zeta", "beta", "density", "lattice"});
  CloudSpec c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "impedance" && kind != "hard") throw SchemaError("cloud.kind must be 'impedance' or 'hard'");
  c.kind = kind == "impedance" ? ParticleKind::Impedance : ParticleKind::Hard;
  c.a = positive(j.at("a"), "cloud.a");
  c.shape = shape_or_ball(j);
  c.lattice = lattice_or_default(j);
  if (j.contains("centers") == j.contains("density")) {
    throw SchemaError("cloud needs exactly one of 'centers' or 'density'");
  }
  if (c.kind == ParticleKind::Hard) {
    c.beta = j.contains("beta") ? mat3_from_json(j.at("beta")) : ball_polarizability();
    if (j.contains("h") || j.contains("zeta")) throw SchemaError("hard clouds take 'beta', not 'h' or 'zeta'");
  } else if (j.contains("beta")) {
    throw SchemaError("impedance clouds take 'h' or 'zeta', not 'beta'");
  }

  if (j.contains("centers")) {
    const Json& pts = j.at("centers");
    if (!pts.is_array()) throw SchemaError("cloud.centers must be an array of 3-vectors");
    Points centers(3, Index(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) centers.col(Index(i)) = vec3_from_json(pts[i]);
    c.centers = centers;
    if (c.kind == ParticleKind::Impedance) {
      if (j.contains("h") == j.contains("zeta")) throw SchemaError("impedance cloud needs exactly one of 'h' or 'zeta'");
      const auto per_particle = [&](const Json& v) {
        if (v.is_array()) {
          VectorXc out = complex_vector_from_json(v);
          if (out.size() != centers.cols()) throw SchemaError("cloud: one value per center required");
          return out;
        }
        return VectorXc(VectorXc::Constant(centers.cols(), complex_from_json(v)));
      };
      if (j.contains("h")) {
        c.h = per_particle(j.at("h"));
      } else {
        const VectorXc zeta = per_particle(j.at("zeta"));
        c.h.resize(zeta.size());
        for (Index m = 0; m < zeta.size(); ++m) c.h(m) = h_from_impedance(zeta(m), c.a, c.shape);
      }
    }
    return c;
  }

  const Json& d = j.at("density");
  if (c.kind == ParticleKind::Impedance) {
    allow_keys(d, "cloud.density", {"h", "N"});
    c.h = sample_field(d.at("h"), grid);
    c.density = sample_real_field(d.at("N"), grid);
  } else {
    allow_keys(d, "cloud.density", {"nu"});
    c.density = sample_real_field(d.at("nu"), grid);
  }
  return c;
}

LimitSpec parse_limit(const Json& j, const Grid& grid) {
  LimitSpec l;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "impedance") {
    allow_keys(j, "limit", {"kind", "p", "h", "N", "shape"});
    if (j.contains("p")) {
      if (j.contains("h") || j.contains("N")) throw SchemaError("limit: give either 'p' or 'h' and 'N'");
      l.p = sample_field(j.at("p"), grid);
    } else {
      l.p = potential_from_h_N(sample_field(j.at("h"), grid), sample_real_field(j.at("N"), grid), shape_or_ball(j));
    }
  } else if (kind == "hard") {
    allow_keys(j, "limit", {"kind", "nu", "beta", "collar", "max_iter", "tol"});
    l.kind = ParticleKind::Hard;
    l.nu = sample_real_field(j.at("nu"), grid);
    l.beta = j.contains("beta") ? mat3_from_json(j.at("beta")) : ball_polarizability();
    l.collar = j.value("collar", 2);
    l.max_iter = j.value("max_iter", 200);
    if (j.contains("tol")) l.tol = positive(j.at("tol"), "limit.tol");
    if (l.collar < 0 || l.max_iter <= 0) throw SchemaError("limit: collar must be >= 0 and max_iter > 0");
  } else {
    throw SchemaError("limit.kind must be 'impedance' or 'hard'");
  }
  return l;
}

DesignSceneSpec parse_design(const Json& j, const Grid& grid) {
  allow_keys(j, "design", {"target_n", "a", "shape", "lattice", "verify"});
  DesignSceneSpec d;
  d.target_n = sample_field(j.at("target_n"), grid, 1.0);
  d.a = positive(j.at("a"), "design.a");
  d.shape = shape_or_ball(j);
  d.lattice = lattice_or_default(j);
  if (j.contains("verify")) {
    allow_keys(j.at("verify"), "design.verify", {"a_sequence"});
    d.verify_a = radii_from_json(j.at("verify").at("a_sequence"));
  }
  return d;
}

StudySpec parse_study(const Json& j, const Grid& grid) {
  StudySpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "impedance") {
    allow_keys(j, "study", {"kind", "h", "N", "a_sequence", "shape", "lattice"});
    s.h = sample_field(j.at("h"), grid);
    s.density = sample_real_field(j.at("N"), grid);
  } else if (kind == "hard") {
    allow_keys(j, "study", {"kind", "nu", "beta", "a_sequence", "shape", "lattice"});
    s.mode = StudyMode::Hard;
    s.density = sample_real_field(j.at("nu"), grid);
    s.beta = j.contains("beta") ? mat3_from_json(j.at("beta")) : ball_polarizability();
  } else {
    throw SchemaError("study.kind must be 'impedance' or 'hard'");
  }
  s.a_sequence = radii_from_json(j.at("a_sequence"));
  s.shape = shape_or_ball(j);
  s.lattice = lattice_or_default(j);
  return s;
}

Scene parse_scene_unchecked(const Json& j, std::optional<double> tol) {
  allow_keys(j, "scene",
             {"format_version", "medium", "incident", "solver", "points", "far_field", "cloud", "limit", "design", "study"});
  if (j.contains("format_version") && j.at("format_version").get<int>() != kFormatVersion) {
    throw SchemaError("unsupported scene format_version");
  }
  Scene s;
  s.source = j;

  if (j.contains("solver")) {
    const Json& so = j.at("solver");
    allow_keys(so, "solver", {"tol", "dense_limit", "restart", "max_iterations"});
    if (so.contains("tol")) s.foldy.tol = positive(so.at("tol"), "solver.tol");
    if (so.contains("dense_limit")) s.foldy.dense_limit = so.at("dense_limit").get<Index>();
    if (so.contains("restart")) s.foldy.restart = so.at("restart").get<int>();
    if (so.contains("max_iterations")) s.foldy.max_iterations = so.at("max_iterations").get<int>();
    if (s.foldy.dense_limit < 0 || s.foldy.restart <= 0 || s.foldy.max_iterations <= 0) {
      throw SchemaError("solver: dense_limit >= 0, restart > 0 and max_iterations > 0 required");
    }
  }
  if (tol) {
    if (!(*tol > 0.0)) throw SchemaError("--tol must be positive");
    s.foldy.tol = *tol;
  }
  SolverOptions background;
  background.tol = s.foldy.tol;
  s.medium.emplace(parse_medium(j.at("medium"), background));
  const Grid& grid = s.medium->grid();

  if (j.contains("incident")) {
    allow_keys(j.at("incident"), "incident", {"direction"});
    s.alpha = direction_from_json(j.at("incident").at("direction"), "incident.direction");
  }

  const Json points = j.value("points", Json("probes"));
  if (points.is_string()) {
    if (points.get<std::string>() != "probes") throw SchemaError("points must be an array or \"probes\"");
    s.points = far_probes(s.medium->domain());
  } else if (points.is_array()) {
    Points p(3, Index(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) p.col(Index(i)) = vec3_from_json(points[i]);
    s.points = p;
  } else {
    throw SchemaError("points must be an array or \"probes\"");
  }

  if (j.contains("far_field")) {
    const Json& f = j.at("far_field");
    allow_keys(f, "far_field", {"n_theta", "n_phi", "directions"});
    if (f.contains("directions")) {
      if (f.contains("n_theta") || f.contains("n_phi")) throw SchemaError("far_field: directions or n_theta/n_phi, not both");
      const Json& d = f.at("directions");
      if (!d.is_array() || d.empty()) throw SchemaError("far_field.directions must be a non-empty array");
      Points dirs(3, Index(d.size()));
      for (std::size_t i = 0; i < d.size(); ++i) dirs.col(Index(i)) = direction_from_json(d[i], "far_field direction");
      s.directions = direction_list(dirs);
    } else {
      const int nt = f.value("n_theta", 32);
      const int np = f.value("n_phi", 64);
      if (nt <= 0 || np <= 0) throw SchemaError("far_field: n_theta and n_phi must be positive");
      s.directions = lat_long_grid(nt, np);
    }
  } else {
    s.directions = lat_long_grid(32, 64);
  }

  if (j.contains("cloud")) s.cloud = parse_cloud(j.at("cloud"), grid);
  if (j.contains("limit")) s.limit = parse_limit(j.at("limit"), grid);
  if (j.contains("design")) s.design = parse_design(j.at("design"), grid);
  if (j.contains("study")) s.study = parse_study(j.at("study"), grid);
  return s;
}

}  // namespace

Scene parse_scene(const Json& j, std::optional<double> tol) {
  try {
    return parse_scene_unchecked(j, tol);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scene: ") + e.what());
  }
}

Scene load_scene(const std::string& path, std::optional<double> tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read scene file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  Json j;
  try {
    j = Json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("scene is not valid JSON: ") + e.what());
  }
  spdlog::debug("loaded scene {}", path);
  return parse_scene(j, tol);
}

ParticleCloud build_scene_cloud(const Scene& scene, const CloudSpec& spec) {
  const BackgroundMedium& medium = scene.background();
  if (spec.centers) {
    if (spec.kind == ParticleKind::Impedance) return make_impedance_cloud(*spec.centers, spec.a, spec.h, spec.shape);
    return make_hard_cloud(*spec.centers, spec.a, spec.beta, spec.shape);
  }
  if (spec.kind == ParticleKind::Impedance) {
    return build_cloud_impedance(medium, spec.a, spec.h, spec.density, spec.shape, spec.lattice);
  }
  return build_cloud_hard(medium, spec.a, spec.density, spec.beta, spec.shape, spec.lattice);
}

}  // namespace smallbody
