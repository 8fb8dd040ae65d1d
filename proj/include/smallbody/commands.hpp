#pragma once

#include "smallbody/scene.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smallbody {

/// Output files of one subcommand, in write order: (file name, contents).
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

/// Runs a subcommand on a parsed scene and returns its files without touching
/// the disk. `metadata` receives wall time and other run information.
OutputFiles run_scene(const std::string& command, const Scene& scene, Json* metadata = nullptr);

struct CommandOptions {
  std::string command;
  std::string scene_path;
  std::string out_dir;
  std::optional<double> tol;
  int threads = 0;  // 0 keeps the runtime default
};

/// Exit code for an exception: 2 schema, 3 invariant, 4 solver failure, 1 otherwise.
int exit_code_for(const std::exception& e);
Json error_json(const std::exception& e, const std::string& command);

/// Loads the scene, runs the command and writes every file into out_dir only
/// after the whole run succeeded. On failure prints the error JSON to `out`
/// and writes nothing but out_dir/error.json.
int run_command(const CommandOptions& options, std::ostream& out);

/// Routes logging to stderr at the level named by SMALLBODY_LOG (default warn).
void configure_logging();

}  // namespace smallbody
