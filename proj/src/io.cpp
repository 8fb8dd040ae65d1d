#include "smallbody/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace smallbody {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

namespace {

void append_cell(std::string& body, std::size_t& filled, const std::string& text) {
  if (filled > 0) body += ',';
  body += text;
  ++filled;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvWriter& CsvWriter::add(double v) {
  append_cell(body_, filled_, format_double(v));
  return *this;
}

CsvWriter& CsvWriter::add(Index v) {
  append_cell(body_, filled_, std::to_string(v));
  return *this;
}

CsvWriter& CsvWriter::add(Complex v) {
  add(v.real());
  return add(v.imag());
}

CsvWriter& CsvWriter::add(const std::string& v) {
  append_cell(body_, filled_, quote(v));
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_.size()) {
    throw Error("CsvWriter: row has " + std::to_string(filled_) + " cells, expected " +
                std::to_string(columns_.size()));
  }
  body_ += '\n';
  filled_ = 0;
}

std::string CsvWriter::str() const {
  std::string head = "# format_version=" + std::to_string(kFormatVersion) + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) head += ',';
    head += columns_[i];
  }
  return head + '\n' + body_;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from_json(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw SchemaError("expected a number, got " + j.dump());
  return j.get<double>();
}

Json to_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_object() && j.contains("re")) {
    const double im = j.contains("im") ? number_from_json(j.at("im")) : 0.0;
    return {number_from_json(j.at("re")), im};
  }
  throw SchemaError("expected a complex number {re, im}, got " + j.dump());
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector, got " + j.dump());
  return Vec3(number_from_json(j[0]), number_from_json(j[1]), number_from_json(j[2]));
}

Json to_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(to_json(Vec3(m.row(r).transpose())));
  return rows;
}

Mat3 mat3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3x3 matrix, got " + j.dump());
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3_from_json(j[std::size_t(r)]).transpose();
  return m;
}

Json complex_array(const VectorXc& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

VectorXc complex_vector_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of complex numbers");
  VectorXc v(Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = complex_from_json(j[i]);
  return v;
}

Json real_array(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Eigen::VectorXd real_vector_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of numbers");
  Eigen::VectorXd v(Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = number_from_json(j[i]);
  return v;
}

Json to_json(const ShapeConstants& s) { return Json{{"c1", s.c1}, {"c2", s.c2}, {"c3", s.c3}}; }

ShapeConstants shape_from_json(const Json& j) {
  ShapeConstants s;
  if (!j.is_object()) throw SchemaError("shape must be an object {c1, c2, c3}");
  s.c1 = j.contains("c1") ? number_from_json(j.at("c1")) : s.c1;
  s.c2 = j.contains("c2") ? number_from_json(j.at("c2")) : s.c2;
  s.c3 = j.contains("c3") ? number_from_json(j.at("c3")) : s.c3;
  if (!(s.c1 > 0.0 && s.c2 > 0.0 && s.c3 > 0.0)) throw SchemaError("shape constants must be positive");
  return s;
}

namespace {

Json lattice_json(const LatticeReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    cells.push_back(Json{{"block", {c.block(0), c.block(1), c.block(2)}},
                         {"measure", c.measure},
                         {"count", c.count},
                         {"volume", c.volume},
                         {"spacing", c.spacing}});
  }
  return Json{{"cell_nodes", r.cell_nodes},
              {"cell_size", r.cell_size},
              {"requested", r.requested},
              {"rounding_discrepancy", r.rounding_discrepancy},
              {"cells", cells}};
}

LatticeReport lattice_from_json(const Json& j) {
  LatticeReport r;
  r.cell_nodes = j.at("cell_nodes").get<int>();
  r.cell_size = number_from_json(j.at("cell_size"));
  r.requested = number_from_json(j.at("requested"));
  r.rounding_discrepancy = number_from_json(j.at("rounding_discrepancy"));
  for (const auto& c : j.at("cells")) {
    LatticeCell cell;
    cell.block = Eigen::Array3i(c.at("block")[0].get<int>(), c.at("block")[1].get<int>(), c.at("block")[2].get<int>());
    cell.measure = number_from_json(c.at("measure"));
    cell.count = c.at("count").get<Index>();
    cell.volume = number_from_json(c.at("volume"));
    cell.spacing = number_from_json(c.at("spacing"));
    r.cells.push_back(cell);
  }
  return r;
}

Json points_json(const Points& p) {
  Json a = Json::array();
  for (Index i = 0; i < p.cols(); ++i) a.push_back(to_json(Vec3(p.col(i))));
  return a;
}

Points points_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of 3-vectors");
  Points p(3, Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p.col(Index(i)) = vec3_from_json(j[i]);
  return p;
}

}  // namespace

Json to_json(const ParticleCloud& cloud) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = cloud.kind == ParticleKind::Impedance ? "impedance" : "hard";
  j["a"] = cloud.a;
  j["d"] = number(cloud.d);
  j["shape"] = to_json(cloud.shape);
  j["centers"] = points_json(cloud.centers);
  if (cloud.kind == ParticleKind::Impedance) {
    j["zeta"] = complex_array(cloud.zeta);
    j["h"] = complex_array(cloud.h);
  } else {
    Json b = Json::array();
    for (const auto& m : cloud.beta) b.push_back(to_json(m));
    j["beta"] = b;
  }
  j["lattice"] = lattice_json(cloud.lattice);
  return j;
}

ParticleCloud cloud_from_json(const Json& j) {
  ParticleCloud c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "impedance" && kind != "hard") throw SchemaError("cloud kind must be 'impedance' or 'hard'");
  c.kind = kind == "impedance" ? ParticleKind::Impedance : ParticleKind::Hard;
  c.a = number_from_json(j.at("a"));
  c.d = number_from_json(j.at("d"));
  c.shape = shape_from_json(j.at("shape"));
  c.centers = points_from_json(j.at("centers"));
  if (c.kind == ParticleKind::Impedance) {
    c.zeta = complex_vector_from_json(j.at("zeta"));
    c.h = complex_vector_from_json(j.at("h"));
  } else {
    for (const auto& m : j.at("beta")) c.beta.push_back(mat3_from_json(m));
  }
  if (j.contains("lattice")) c.lattice = lattice_from_json(j.at("lattice"));
  return c;
}

Json to_json(const CloudValidation& v) {
  Json j;
  j["particles"] = v.particles;
  j["ka"] = v.ka;
  j["spacing_over_a"] = number(v.spacing_over_a);
  j["max_zeta_a"] = v.max_zeta_a;
  j["volume_fraction"] = v.volume_fraction;
  j["violations"] = v.violations;
  j["ok"] = v.ok();
  return j;
}

namespace {

Json feasibility_json(const Feasibility& f) {
  return Json{{"ka", f.ka},
              {"particles", f.particles},
              {"spacing_over_a", number(f.spacing_over_a)},
              {"volume_fraction", f.volume_fraction},
              {"cell_nodes", f.cell_nodes},
              {"cell_size", f.cell_size},
              {"max_cell_count", f.max_cell_count},
              {"min_cell_spacing_over_a", f.min_cell_spacing_over_a},
              {"extrapolated", f.extrapolated}};
}

Feasibility feasibility_from_json(const Json& j) {
  Feasibility f;
  f.ka = number_from_json(j.at("ka"));
  f.particles = j.at("particles").get<Index>();
  f.spacing_over_a = number_from_json(j.at("spacing_over_a"));
  f.volume_fraction = number_from_json(j.at("volume_fraction"));
  f.cell_nodes = j.at("cell_nodes").get<int>();
  f.cell_size = number_from_json(j.at("cell_size"));
  f.max_cell_count = j.at("max_cell_count").get<Index>();
  f.min_cell_spacing_over_a = number_from_json(j.at("min_cell_spacing_over_a"));
  f.extrapolated = j.at("extrapolated").get<bool>();
  return f;
}

}  // namespace

Json to_json(const DesignResult& r) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["p"] = complex_array(r.p);
  j["h"] = complex_array(r.h);
  j["N"] = real_array(r.N);
  std::string branches;
  for (auto b : r.branches) branches += branch_letter(b);
  j["branches"] = branches;
  j["feasibility"] = feasibility_json(r.feasibility);
  j["cloud"] = to_json(r.cloud);
  return j;
}

DesignResult design_result_from_json(const Json& j) {
  DesignResult r;
  r.p = complex_vector_from_json(j.at("p"));
  r.h = complex_vector_from_json(j.at("h"));
  r.N = real_vector_from_json(j.at("N"));
  for (char c : j.at("branches").get<std::string>()) {
    if (c < 'A' || c > 'E') throw SchemaError("unknown design branch");
    r.branches.push_back(DesignBranch(c - 'A'));
  }
  r.feasibility = feasibility_from_json(j.at("feasibility"));
  r.cloud = cloud_from_json(j.at("cloud"));
  return r;
}

namespace {

Json counting_json(const CountingPair& c) {
  return Json{{"particle_sum", c.particle_sum}, {"integral", c.integral}};
}

CountingPair counting_from_json(const Json& j) {
  return {number_from_json(j.at("particle_sum")), number_from_json(j.at("integral"))};
}

}  // namespace

Json to_json(const ScaleStudy& study) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["mode"] = study.mode == StudyMode::Impedance ? "impedance" : "hard";
  j["incident_direction"] = to_json(study.incident_direction);
  j["probes"] = points_json(study.probes);
  Json scales = Json::array();
  for (const auto& s : study.scales) {
    scales.push_back(Json{{"a", s.a},
                          {"particles", s.particles},
                          {"d", number(s.d)},
                          {"cell_size", s.cell_size},
                          {"max_error", s.max_error},
                          {"rms_error", s.rms_error},
                          {"max_charge", s.max_charge},
                          {"forward_discrete", to_json(s.forward_discrete)},
                          {"forward_limit", to_json(s.forward_limit)},
                          {"count_unit", counting_json(s.count_unit)},
                          {"count_smooth", counting_json(s.count_smooth)},
                          {"residual", s.residual},
                          {"failure", s.failure}});
  }
  j["scales"] = scales;
  j["exponent_particles"] = number(study.exponent_particles);
  j["exponent_charge"] = number(study.exponent_charge);
  j["exponent_error"] = number(study.exponent_error);
  j["strictly_decreasing"] = study.strictly_decreasing;
  j["exact"] = study.exact;
  j["complete"] = study.complete;
  return j;
}

ScaleStudy study_from_json(const Json& j) {
  ScaleStudy s;
  s.mode = j.at("mode").get<std::string>() == "hard" ? StudyMode::Hard : StudyMode::Impedance;
  s.incident_direction = vec3_from_json(j.at("incident_direction"));
  s.probes = points_from_json(j.at("probes"));
  for (const auto& r : j.at("scales")) {
    ScaleRecord rec;
    rec.a = number_from_json(r.at("a"));
    rec.particles = r.at("particles").get<Index>();
    rec.d = number_from_json(r.at("d"));
    rec.cell_size = number_from_json(r.at("cell_size"));
    rec.max_error = number_from_json(r.at("max_error"));
    rec.rms_error = number_from_json(r.at("rms_error"));
    rec.max_charge = number_from_json(r.at("max_charge"));
    rec.forward_discrete = complex_from_json(r.at("forward_discrete"));
    rec.forward_limit = complex_from_json(r.at("forward_limit"));
    rec.count_unit = counting_from_json(r.at("count_unit"));
    rec.count_smooth = counting_from_json(r.at("count_smooth"));
    rec.residual = number_from_json(r.at("residual"));
    rec.failure = r.at("failure").get<std::string>();
    s.scales.push_back(rec);
  }
  const auto maybe = [](const Json& v) { return v.is_null() ? std::nan("") : v.get<double>(); };
  s.exponent_particles = maybe(j.at("exponent_particles"));
  s.exponent_charge = maybe(j.at("exponent_charge"));
  s.exponent_error = maybe(j.at("exponent_error"));
  s.strictly_decreasing = j.at("strictly_decreasing").get<bool>();
  s.exact = j.at("exact").get<bool>();
  s.complete = j.at("complete").get<bool>();
  return s;
}

std::string far_field_csv(const FarField& far) {
  CsvWriter csv({"index", "theta", "phi", "beta_x", "beta_y", "beta_z", "re_A", "im_A", "re_A0", "im_A0"});
  for (Index b = 0; b < far.values.size(); ++b) {
    const Vec3 d = far.directions.directions.col(b);
    csv.add(b).add(far.directions.theta(b)).add(far.directions.phi(b)).add(d.x()).add(d.y()).add(d.z());
    csv.add(far.values(b)).add(far.background.size() ? far.background(b) : Complex(0.0));
    csv.end_row();
  }
  return csv.str();
}

std::string field_csv(const ComplexField& field, const ComplexField* incident) {
  CsvWriter csv({"index", "x", "y", "z", "re_u", "im_u", "re_u0", "im_u0"});
  for (Index p = 0; p < field.size(); ++p) {
    const Vec3 x = field.points.col(p);
    csv.add(p).add(x.x()).add(x.y()).add(x.z()).add(field.values(p));
    csv.add(incident ? incident->values(p) : Complex(0.0));
    csv.end_row();
  }
  return csv.str();
}

std::string grid_field_csv(const Grid& grid, const VectorXc& values) {
  CsvWriter csv({"index", "i", "j", "k", "x", "y", "z", "re_u", "im_u"});
  for (Index n = 0; n < grid.size(); ++n) {
    const Eigen::Array3i c = grid.ijk(n);
    const Vec3 x = grid.node(n);
    csv.add(n).add(c(0)).add(c(1)).add(c(2)).add(x.x()).add(x.y()).add(x.z()).add(values(n));
    csv.end_row();
  }
  return csv.str();
}

std::string study_csv(const ScaleStudy& study) {
  CsvWriter csv({"a", "M", "d", "cell_size", "e_max", "e_rms", "max_abs_Q", "re_A_fwd", "im_A_fwd", "re_A_fwd_limit",
                 "im_A_fwd_limit", "count_unit_rel", "count_smooth_rel", "ok"});
  for (const auto& s : study.scales) {
    csv.add(s.a).add(s.particles).add(s.d).add(s.cell_size).add(s.max_error).add(s.rms_error).add(s.max_charge);
    csv.add(s.forward_discrete).add(s.forward_limit);
    csv.add(s.count_unit.relative_difference()).add(s.count_smooth.relative_difference());
    csv.add(Index(s.failure.empty() ? 1 : 0));
    csv.end_row();
  }
  return csv.str();
}

std::string centers_csv(const ParticleCloud& cloud) {
  CsvWriter csv({"index", "x", "y", "z"});
  for (Index m = 0; m < cloud.size(); ++m) {
    const Vec3 x = cloud.centers.col(m);
    csv.add(m).add(x.x()).add(x.y()).add(x.z());
    csv.end_row();
  }
  return csv.str();
}

}  // namespace smallbody
