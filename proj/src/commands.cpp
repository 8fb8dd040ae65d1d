#include "smallbody/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smallbody {

namespace fs = std::filesystem;

namespace {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json stats_json(const SolveStats& s) {
  return Json{{"residual", s.residual}, {"iterations", s.iterations}, {"direct", s.direct}};
}

Json medium_json(const BackgroundMedium& m) {
  const Grid& g = m.grid();
  Index inside = 0;
  for (bool b : m.inside()) inside += b ? 1 : 0;
  Json j;
  j["k"] = m.k();
  j["resolution"] = {g.dims()(0), g.dims()(1), g.dims()(2)};
  j["spacing"] = g.spacing();
  j["nodes"] = g.size();
  j["nodes_in_domain"] = inside;
  j["free"] = m.is_free();
  double max_im_q0 = -std::numeric_limits<double>::infinity();
  for (Index n = 0; n < g.size(); ++n) max_im_q0 = std::max(max_im_q0, m.q0()(n).imag());
  j["max_im_q0"] = number(max_im_q0);
  return j;
}

Points single(const Vec3& v) {
  Points p(3, 1);
  p.col(0) = v;
  return p;
}

bool all_real(const VectorXc& v) { return (v.imag().array() == 0.0).all(); }

Json optical_json(const FarField& far, Complex forward, double k) {
  if (!far.directions.has_quadrature()) return nullptr;
  const OpticalTheoremReport r = optical_theorem(far, forward, k);
  return Json{{"im_forward", r.im_forward}, {"flux", r.flux}, {"relative_error", r.relative_error}};
}

OutputFiles cmd_solve(const Scene& scene, Json& meta) {
  if (!scene.cloud) throw SchemaError("solve: scene has no 'cloud'");
  const BackgroundMedium& medium = scene.background();
  const ParticleCloud cloud = build_scene_cloud(scene, *scene.cloud);
  require_valid(cloud, medium, scene.cloud->lattice);
  const Points& points = *scene.points;
  require_far_from_particles(cloud, points);
  const ComplexField u0 = incident_field(medium, scene.alpha, points);

  Json info;
  info["format_version"] = kFormatVersion;
  info["command"] = "solve";
  info["kind"] = cloud.kind == ParticleKind::Impedance ? "impedance" : "hard";
  info["particles"] = cloud.size();
  info["a"] = cloud.a;
  info["d"] = number(cloud.d);
  info["incident_direction"] = to_json(scene.alpha);
  info["medium"] = medium_json(medium);
  info["validation"] = to_json(validate_cloud(cloud, medium, scene.cloud->lattice));

  ComplexField field;
  FarField far;
  Complex forward;
  double max_charge = 0.0;
  if (cloud.kind == ParticleKind::Impedance) {
    const ImpedanceSolveResult r = assemble_and_solve(medium, cloud, scene.alpha, scene.foldy);
    field = evaluate_field(r, medium, cloud, points);
    far = far_field(r, medium, cloud, scene.directions);
    forward = far_field(r, medium, cloud, direction_list(single(scene.alpha))).values(0);
    info["solver"] = stats_json(r.stats);
    max_charge = r.charges.size() ? r.charges.cwiseAbs().maxCoeff() : 0.0;
  } else {
    const HardSolveResult r = assemble_and_solve_hard(medium, cloud, scene.alpha, scene.foldy);
    field = evaluate_field_hard(r, medium, cloud, points);
    far = far_field_hard(r, medium, cloud, scene.directions);
    forward = far_field_hard(r, medium, cloud, direction_list(single(scene.alpha))).values(0);
    info["solver"] = stats_json(r.stats);
    max_charge = r.charges.size() ? r.charges.cwiseAbs().maxCoeff() : 0.0;
  }
  info["max_abs_charge"] = max_charge;
  info["forward_amplitude"] = to_json(forward);
  info["optical_theorem"] = optical_json(far, forward, medium.k());
  meta["particles"] = cloud.size();

  return {{"field.csv", field_csv(field, &u0)},
          {"far_field.csv", far_field_csv(far)},
          {"particles.csv", centers_csv(cloud)},
          {"cloud.json", dump(to_json(cloud))},
          {"solve.json", dump(info)}};
}

// Discrete Fourier transform of the grid-sampled potential: the Born amplitude.
VectorXc born_amplitude(const Grid& grid, const VectorXc& p, double k, const Vec3& alpha, const DirectionSet& dirs) {
  VectorXc out(dirs.size());
  const Points nodes = grid.nodes();
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < dirs.size(); ++b) {
    const Vec3 q = k * (Vec3(dirs.directions.col(b)) - alpha);
    Complex acc = 0.0;
    for (Index n = 0; n < grid.size(); ++n) {
      if (p(n) != Complex(0.0)) acc += std::exp(-kI * q.dot(nodes.col(n))) * p(n);
    }
    out(b) = -acc * grid.cell_volume() / (4.0 * kPi);
  }
  return out;
}

OutputFiles cmd_limit(const Scene& scene, Json& meta) {
  if (!scene.limit) throw SchemaError("limit: scene has no 'limit'");
  const LimitSpec& spec = *scene.limit;
  const BackgroundMedium& medium = scene.background();
  const Points& points = *scene.points;
  const ComplexField u0 = incident_field(medium, scene.alpha, points);

  Json info;
  info["format_version"] = kFormatVersion;
  info["command"] = "limit";
  info["kind"] = spec.kind == ParticleKind::Impedance ? "impedance" : "hard";
  info["incident_direction"] = to_json(scene.alpha);
  info["medium"] = medium_json(medium);

  LimitSolution sol;
  ComplexField field;
  FarField far;
  if (spec.kind == ParticleKind::Impedance) {
    const ImpedanceLimitProblem problem(medium, spec.p);
    sol = solve_impedance_limit(problem, scene.alpha);
    field = evaluate_impedance_limit(problem, sol, points);
    far = limiting_amplitude(problem, sol, scene.directions);
    info["solver"] = stats_json(sol.stats);
    const Complex forward = limiting_amplitude(problem, sol, direction_list(single(scene.alpha))).values(0);
    info["forward_amplitude"] = to_json(forward);
    info["optical_theorem"] =
        all_real(spec.p) && all_real(medium.q0()) ? optical_json(far, forward, medium.k()) : Json(nullptr);
    if (medium.is_free()) {
      const VectorXc born = born_amplitude(medium.grid(), spec.p, medium.k(), scene.alpha, scene.directions);
      const double scale = born.cwiseAbs().maxCoeff();
      const double diff = (far.values - born).cwiseAbs().maxCoeff();
      info["born_check"] = Json{{"max_abs_born", scale}, {"relative_difference", scale > 0.0 ? diff / scale : diff}};
    } else {
      info["born_check"] = nullptr;
    }
  } else {
    const HardLimitProblem problem(medium, spec.nu, {spec.beta}, spec.collar);
    sol = solve_hard_limit(problem, scene.alpha, spec.max_iter, spec.tol);
    field = evaluate_hard_limit(problem, sol, points);
    far = hard_limit_amplitude(problem, sol, scene.directions);
    info["iterations"] = sol.changes.size();
    info["changes"] = sol.changes;
  }
  meta["grid_nodes"] = medium.grid().size();

  return {{"grid_solution.csv", grid_field_csv(medium.grid(), sol.values)},
          {"amplitude.csv", far_field_csv(far)},
          {"field.csv", field_csv(field, &u0)},
          {"limit.json", dump(info)}};
}

OutputFiles cmd_design(const Scene& scene, Json& meta) {
  if (!scene.design) throw SchemaError("design: scene has no 'design'");
  const DesignSceneSpec& d = *scene.design;
  const DesignSpec spec(scene.background(), d.target_n, d.a, d.shape, d.lattice);
  const DesignResult result = design(spec);
  meta["particles"] = result.cloud.size();

  OutputFiles files{{"design.json", dump(to_json(result))}, {"particles.csv", centers_csv(result.cloud)}};
  if (!d.verify_a.empty()) {
    const DesignVerification v = verify_design(result, spec, scene.alpha, d.verify_a, *scene.points);
    Json j = to_json(v.study);
    j["decreasing"] = v.decreasing;
    j["final_error"] = number(v.final_error);
    j["success"] = v.success;
    j["extrapolated"] = v.extrapolated;
    files.emplace_back("verification.csv", study_csv(v.study));
    files.emplace_back("verification.json", dump(j));
  }
  return files;
}

OutputFiles cmd_study(const Scene& scene, Json& meta) {
  if (!scene.study) throw SchemaError("study: scene has no 'study'");
  const StudySpec& s = *scene.study;
  const ScaleStudy study =
      s.mode == StudyMode::Impedance
          ? run_impedance_study(scene.background(), s.h, s.density, s.a_sequence, scene.alpha, *scene.points, s.shape,
                                s.lattice)
          : run_hard_study(scene.background(), s.density, s.beta, s.a_sequence, scene.alpha, *scene.points, s.shape,
                           s.lattice);
  meta["complete"] = study.complete;
  return {{"study.csv", study_csv(study)}, {"study.json", dump(to_json(study))}};
}

OutputFiles cmd_validate(const Scene& scene, Json& meta) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["command"] = "validate";
  j["medium"] = medium_json(scene.background());
  j["sections"] = Json::array();
  for (const char* key : {"cloud", "limit", "design", "study"}) {
    if (scene.source.contains(key)) j["sections"].push_back(key);
  }
  bool ok = true;
  if (scene.cloud) {
    const ParticleCloud cloud = build_scene_cloud(scene, *scene.cloud);
    const CloudValidation v = validate_cloud(cloud, scene.background(), scene.cloud->lattice);
    j["cloud"] = to_json(v);
    ok = ok && v.ok();
  }
  if (scene.limit && scene.limit->kind == ParticleKind::Hard) {
    const HardLimitProblem problem(scene.background(), scene.limit->nu, {scene.limit->beta}, scene.limit->collar);
    j["limit"] = Json{{"max_nu", problem.nu.maxCoeff()}};
  } else if (scene.limit) {
    const ImpedanceLimitProblem problem(scene.background(), scene.limit->p);
    j["limit"] = Json{{"max_abs_p", problem.p.cwiseAbs().maxCoeff()}};
  }
  if (scene.design) {
    const DesignSpec spec(scene.background(), scene.design->target_n, scene.design->a, scene.design->shape,
                          scene.design->lattice);
    const HNChoice choice = choose_h_N(target_to_potential(spec), spec.shape);
    j["design"] = Json{{"extrapolated", choice.extrapolated}, {"max_round_trip_error", choice.max_round_trip_error}};
  }
  j["ok"] = ok;
  meta["ok"] = ok;
  return {{"validation.json", dump(j)}};
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

}  // namespace

OutputFiles run_scene(const std::string& command, const Scene& scene, Json* metadata) {
  Json meta;
  OutputFiles files;
  if (command == "solve") {
    files = cmd_solve(scene, meta);
  } else if (command == "limit") {
    files = cmd_limit(scene, meta);
  } else if (command == "design") {
    files = cmd_design(scene, meta);
  } else if (command == "study") {
    files = cmd_study(scene, meta);
  } else if (command == "validate") {
    files = cmd_validate(scene, meta);
  } else {
    throw SchemaError("unknown command '" + command + "'");
  }
  if (metadata) *metadata = std::move(meta);
  return files;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return 2;
  if (dynamic_cast<const InvariantViolation*>(&e)) return 3;
  if (dynamic_cast<const SingularEvaluation*>(&e)) return 3;
  if (dynamic_cast<const SolverFailure*>(&e)) return 4;
  return 1;
}

Json error_json(const std::exception& e, const std::string& command) {
  const int code = exit_code_for(e);
  const char* type = code == 2   ? "schema"
                     : code == 3 ? "invariant"
                     : code == 4 ? "solver_failure"
                                 : "internal";
  Json j;
  j["format_version"] = kFormatVersion;
  j["status"] = "error";
  j["command"] = command;
  j["exit_code"] = code;
  j["error"] = Json{{"type", type}, {"message", e.what()}};
  return j;
}

int run_command(const CommandOptions& options, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir(options.out_dir);
  try {
    const Scene scene = load_scene(options.scene_path, options.tol);
    Json meta;
    OutputFiles files = run_scene(options.command, scene, &meta);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json run;
    run["format_version"] = kFormatVersion;
    run["status"] = "ok";
    run["command"] = options.command;
    run["scene"] = options.scene_path;
#ifdef _OPENMP
    run["threads"] = omp_get_max_threads();
#else
    run["threads"] = 1;
#endif
    run["wall_time_s"] = seconds;
    run["files"] = Json::array();
    for (const auto& f : files) run["files"].push_back(f.first);
    run["details"] = meta;
    files.emplace_back("run.json", dump(run));

    fs::create_directories(dir);
    fs::remove(dir / "error.json");
    std::vector<fs::path> written;
    try {
      for (const auto& [name, contents] : files) {
        write_file(dir / name, contents);
        written.push_back(dir / name);
      }
    } catch (...) {
      for (const auto& p : written) fs::remove(p);
      throw;
    }
    spdlog::info("{}: wrote {} files to {} in {:.3f} s", options.command, files.size(), dir.string(), seconds);
    if (options.command == "validate" && !meta.value("ok", true)) {
      out << dump(Json{{"format_version", kFormatVersion}, {"status", "invalid"}, {"command", "validate"}});
      return 3;
    }
    return 0;
  } catch (const std::exception& e) {
    const Json err = error_json(e, options.command);
    out << dump(err);
    spdlog::error("{}", e.what());
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) {
      std::ofstream f(dir / "error.json", std::ios::binary | std::ios::trunc);
      f << dump(err);
    }
    return err["exit_code"].get<int>();
  }
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("smallbody");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("SMALLBODY_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

}  // namespace smallbody
