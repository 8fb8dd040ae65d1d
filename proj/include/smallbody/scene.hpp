#pragma once

#include "smallbody/io.hpp"

#include <optional>

namespace smallbody {

/// Grid field recipe from a scene. Accepted forms:
///   number | {re, im}                       constant everywhere
///   {"type":"constant", "value", "region", "outside"}
///   {"type":"radial", "center", "radius", "profile": [[r, v], ...], "outside"}
///   {"type":"gaussian", "center", "width", "amplitude", "outside"}
///   {"type":"table", "values": [...]}      one entry per grid node
/// `fallback` is the value outside a region when "outside" is absent.
VectorXc sample_field(const Json& spec, const Grid& grid, Complex fallback = 0.0);
/// Real-valued field; throws SchemaError on a non-zero imaginary part.
Eigen::VectorXd sample_real_field(const Json& spec, const Grid& grid, double fallback = 0.0);

Region region_from_json(const Json& j);
LatticeOptions lattice_from_json(const Json& j);

struct CloudSpec {
  ParticleKind kind = ParticleKind::Impedance;
  double a = 0.0;
  ShapeConstants shape;
  Mat3 beta = Mat3::Zero();
  std::optional<Points> centers;  // explicit placement
  VectorXc h;                     // explicit: per particle; density: per grid node
  Eigen::VectorXd density;        // N or ν per grid node
  LatticeOptions lattice;
};

struct LimitSpec {
  ParticleKind kind = ParticleKind::Impedance;
  VectorXc p;
  Eigen::VectorXd nu;
  Mat3 beta = Mat3::Zero();
  int collar = 2;
  int max_iter = 200;
  double tol = 1e-10;
};

struct DesignSceneSpec {
  VectorXc target_n;
  double a = 0.0;
  ShapeConstants shape;
  LatticeOptions lattice;
  std::vector<double> verify_a;
};

struct StudySpec {
  StudyMode mode = StudyMode::Impedance;
  VectorXc h;
  Eigen::VectorXd density;
  Mat3 beta = Mat3::Zero();
  std::vector<double> a_sequence;
  ShapeConstants shape;
  LatticeOptions lattice;
};

/// A parsed scene. Every grid field is sampled at load time, so physical
/// invariants are checked before any subcommand runs.
struct Scene {
  Json source;
  std::optional<BackgroundMedium> medium;
  Vec3 alpha = Vec3::UnitZ();
  FoldyOptions foldy;
  std::optional<Points> points;
  DirectionSet directions;
  std::optional<CloudSpec> cloud;
  std::optional<LimitSpec> limit;
  std::optional<DesignSceneSpec> design;
  std::optional<StudySpec> study;

  const BackgroundMedium& background() const { return *medium; }
};

/// Parses and validates. SchemaError for malformed input, InvariantViolation
/// for physically inadmissible values. `tol` overrides every solver tolerance.
Scene parse_scene(const Json& j, std::optional<double> tol = std::nullopt);
Scene load_scene(const std::string& path, std::optional<double> tol = std::nullopt);

/// Builds the particle cloud described by the scene (explicit or lattice).
ParticleCloud build_scene_cloud(const Scene& scene, const CloudSpec& spec);

}  // namespace smallbody
