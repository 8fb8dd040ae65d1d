#include "smallbody/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace smallbody;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("smallbody_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_scene(const std::string& name, const std::string& text) {
  const fs::path p = workdir() / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& command, const fs::path& scene, const fs::path& out, const std::string& extra = "") {
  const std::string cmd = std::string(SMALLBODY_CLI) + " " + command + " --scene " + scene.string() + " --out " +
                          out.string() + " " + extra + " > " + (out.string() + ".stdout") + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  do {
    std::getline(in, line);
  } while (!line.empty() && line[0] == '#');
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

const char* kMedium = R"("medium": {"k": 1.0, "box": {"lo": [-0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5]}, "resolution": [4, 4, 4]})";

}  // namespace

TEST_CASE("single hard ball scene writes the Rayleigh far field") {
  const auto scene = write_scene("hard", std::string("{") + kMedium +
      R"(, "far_field": {"n_theta": 8, "n_phi": 8},
      "cloud": {"kind": "hard", "a": 0.05, "centers": [[0, 0, 0]]}})");
  const fs::path out = workdir() / "hard";
  REQUIRE(run("solve", scene, out) == 0);
  for (const char* f : {"field.csv", "far_field.csv", "particles.csv", "cloud.json", "solve.json", "run.json"}) {
    CHECK(fs::exists(out / f));
  }
  const auto rows = csv_rows(read(out / "far_field.csv"));
  CHECK(rows.size() == 64);
  const double a = 0.05;
  for (const auto& r : rows) {
    const double expected = a * a * a / 3.0 * (1.5 * r[5] - 1.0);
    CHECK(std::abs(r[6] - expected) < 1e-14);
  }
  const Json meta = Json::parse(read(out / "solve.json"));
  CHECK(meta["format_version"] == kFormatVersion);
  CHECK(meta["particles"] == 1);
  CHECK(Json::parse(read(out / "run.json")).contains("wall_time_s"));
  CHECK_FALSE(read(out / "far_field.csv").empty());
}

TEST_CASE("empty cloud scene returns the incident field") {
  const auto scene = write_scene("empty", std::string("{") + kMedium +
      R"(, "cloud": {"kind": "impedance", "a": 0.01, "centers": [], "h": 1}})");
  const fs::path out = workdir() / "empty";
  REQUIRE(run("solve", scene, out) == 0);
  for (const auto& r : csv_rows(read(out / "field.csv"))) {
    CHECK(r[4] == r[6]);
    CHECK(r[5] == r[7]);
  }
}

TEST_CASE("malformed scene exits 2 without partial outputs") {
  const auto scene = write_scene("broken", "{\"medium\": ");
  const fs::path out = workdir() / "broken";
  CHECK(run("solve", scene, out) == 2);
  CHECK(fs::exists(out / "error.json"));
  CHECK_FALSE(fs::exists(out / "field.csv"));
  CHECK_FALSE(fs::exists(out / "run.json"));
  const Json err = Json::parse(read(fs::path(out.string() + ".stdout")));
  CHECK(err["exit_code"] == 2);
  CHECK(err["error"]["type"] == "schema");
}

TEST_CASE("physics violations exit 3") {
  const auto scene = write_scene("bigka", std::string("{") + kMedium +
      R"(, "cloud": {"kind": "impedance", "a": 0.2, "centers": [[0, 0, 0]], "h": 1}})");
  const fs::path out = workdir() / "bigka";
  CHECK(run("solve", scene, out) == 3);
  CHECK_FALSE(fs::exists(out / "solve.json"));
  const auto gain = write_scene("gain", std::string("{") + kMedium +
      R"(, "limit": {"kind": "impedance", "p": {"re": 1, "im": 0.5}}})");
  CHECK(run("limit", gain, workdir() / "gain") == 2 + 1);
}

TEST_CASE("diverging hard limit exits 4 with a non-contraction reason") {
  const auto scene = write_scene("diverge", R"({
    "medium": {"k": 1.0, "box": {"lo": [-0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5]}, "resolution": [8, 8, 8]},
    "limit": {"kind": "hard", "nu": {"type": "constant", "value": 5.0,
              "region": {"type": "ball", "center": [0, 0, 0], "radius": 0.25}}}})");
  const fs::path out = workdir() / "diverge";
  CHECK(run("limit", scene, out) == 4);
  const Json err = Json::parse(read(out / "error.json"));
  CHECK(err["error"]["message"].get<std::string>().find("non-contraction") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "grid_solution.csv"));
}

TEST_CASE("zero potential limit dumps the incident field") {
  const auto scene = write_scene("zero", std::string("{") + kMedium + R"(, "limit": {"kind": "impedance", "p": 0}})");
  const fs::path out = workdir() / "zero";
  REQUIRE(run("limit", scene, out) == 0);
  for (const auto& r : csv_rows(read(out / "grid_solution.csv"))) {
    const double phase = r[6];  // z, incident along +z with k = 1
    CHECK(std::abs(r[7] - std::cos(phase)) < 1e-15);
    CHECK(std::abs(r[8] - std::sin(phase)) < 1e-15);
  }
}

TEST_CASE("Born regime limit scene records the Fourier check") {
  const auto scene = write_scene("born", R"({
    "medium": {"k": 2.0, "box": {"lo": [-0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5]}, "resolution": [10, 10, 10]},
    "far_field": {"n_theta": 4, "n_phi": 4},
    "limit": {"kind": "impedance", "p": {"type": "gaussian", "center": [0, 0, 0], "width": 0.15, "amplitude": 0.02}}})");
  const fs::path out = workdir() / "born";
  REQUIRE(run("limit", scene, out) == 0);
  const Json meta = Json::parse(read(out / "limit.json"));
  CHECK(meta["born_check"]["relative_difference"].get<double>() < 0.01);
}

TEST_CASE("reruns are byte-identical and independent of thread count") {
  const auto scene = write_scene("det", std::string("{") + kMedium + R"(,
      "far_field": {"n_theta": 6, "n_phi": 6},
      "cloud": {"kind": "impedance", "a": 0.01,
                "density": {"h": {"re": 1, "im": -0.2}, "N": 0.3}}})");
  REQUIRE(run("solve", scene, workdir() / "det1", "--threads 1") == 0);
  REQUIRE(run("solve", scene, workdir() / "det2", "--threads 3") == 0);
  REQUIRE(run("solve", scene, workdir() / "det3") == 0);
  for (const char* f : {"field.csv", "far_field.csv", "particles.csv"}) {
    const std::string a = read(workdir() / "det1" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == read(workdir() / "det2" / f));
    CHECK(a == read(workdir() / "det3" / f));
  }
}

TEST_CASE("dense design scene reports 10^3 particles per cell") {
  const auto scene = write_scene("example1", R"({
    "medium": {"k": 1.0, "box": {"lo": [0, 0, 0], "hi": [0.02, 0.02, 0.02]}, "resolution": [4, 4, 4]},
    "design": {"target_n": -62830.85307179586, "a": 1e-5, "lattice": {"cell_nodes": 2}}})");
  const fs::path out = workdir() / "example1";
  REQUIRE(run("design", scene, out) == 0);
  const Json d = Json::parse(read(out / "design.json"));
  CHECK(d["feasibility"]["max_cell_count"] == 1000);
  CHECK(d["feasibility"]["cell_size"].get<double>() == doctest::Approx(1e-2));
  CHECK(d["feasibility"]["volume_fraction"].get<double>() == doctest::Approx(4.18879e-6).epsilon(1e-5));
  CHECK(d["branches"].get<std::string>() == std::string(64, 'B'));
  const DesignResult back = design_result_from_json(d);
  CHECK(to_json(back) == d);
}

TEST_CASE("study scene with three scales has decreasing error") {
  const auto scene = write_scene("study", R"({
    "medium": {"k": 1.0, "box": {"lo": [-0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5]}, "resolution": [8, 8, 8]},
    "study": {"kind": "impedance", "h": 1, "N": 0.15915494309189535, "a_sequence": [0.02, 0.01, 0.005]}})");
  const fs::path out = workdir() / "study";
  REQUIRE(run("study", scene, out) == 0);
  const auto rows = csv_rows(read(out / "study.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][4] < rows[0][4]);
  CHECK(rows[2][4] < rows[1][4]);
  const Json j = Json::parse(read(out / "study.json"));
  CHECK(j["strictly_decreasing"] == true);
  CHECK(to_json(study_from_json(j)) == j);
}

TEST_CASE("validate reports cloud checks and flags violations") {
  const auto good = write_scene("valid", std::string("{") + kMedium +
      R"(, "cloud": {"kind": "hard", "a": 0.01, "centers": [[0, 0, 0], [0.2, 0, 0]]}})");
  REQUIRE(run("validate", good, workdir() / "valid") == 0);
  const Json v = Json::parse(read(workdir() / "valid" / "validation.json"));
  CHECK(v["ok"] == true);
  CHECK(v["cloud"]["particles"] == 2);
  const auto close = write_scene("close", std::string("{") + kMedium +
      R"(, "cloud": {"kind": "hard", "a": 0.01, "centers": [[0, 0, 0], [0.05, 0, 0]]}})");
  CHECK(run("validate", close, workdir() / "close") == 3);
  const Json c = Json::parse(read(workdir() / "close" / "validation.json"));
  CHECK(c["ok"] == false);
  CHECK_FALSE(c["cloud"]["violations"].empty());
}
