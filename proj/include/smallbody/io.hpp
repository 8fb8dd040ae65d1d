#pragma once

#include "smallbody/designer.hpp"

#include <json.hpp>

#include <string>

namespace smallbody {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Shortest text that reads back to the same double ("%.17g"); nan/inf spelled out.
std::string format_double(double v);

/// Builds a CSV document row by row with a fixed column order.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  CsvWriter& add(double v);
  CsvWriter& add(Index v);
  CsvWriter& add(int v) { return add(Index(v)); }
  CsvWriter& add(Complex v);  // two columns
  CsvWriter& add(const std::string& v);
  void end_row();
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::string body_;
  std::size_t filled_ = 0;
};

Json to_json(Complex z);
Complex complex_from_json(const Json& j);
Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);
Json to_json(const Mat3& m);
Mat3 mat3_from_json(const Json& j);
Json complex_array(const VectorXc& v);
VectorXc complex_vector_from_json(const Json& j);
Json real_array(const Eigen::VectorXd& v);
Eigen::VectorXd real_vector_from_json(const Json& j);
/// JSON numbers; non-finite values become null.
Json number(double v);
double number_from_json(const Json& j);

Json to_json(const ShapeConstants& s);
ShapeConstants shape_from_json(const Json& j);
Json to_json(const ParticleCloud& cloud);
ParticleCloud cloud_from_json(const Json& j);
Json to_json(const CloudValidation& v);
Json to_json(const DesignResult& r);
DesignResult design_result_from_json(const Json& j);
Json to_json(const ScaleStudy& study);
ScaleStudy study_from_json(const Json& j);

std::string far_field_csv(const FarField& far);
std::string field_csv(const ComplexField& field, const ComplexField* incident = nullptr);
std::string grid_field_csv(const Grid& grid, const VectorXc& values);
std::string study_csv(const ScaleStudy& study);
std::string centers_csv(const ParticleCloud& cloud);

}  // namespace smallbody
