#include "smallbody/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  smallbody::configure_logging();

  CLI::App app{"smallbody: scattering by many small bodies"};
  app.require_subcommand(1);

  smallbody::CommandOptions options;
  double tol = 0.0;
  for (const char* name : {"solve", "limit", "design", "study", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scene", options.scene_path, "scene JSON file")->required();
    sub->add_option("--out", options.out_dir, "output directory")->required();
    sub->add_option("--threads", options.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", tol, "solver tolerance override")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  options.command = app.get_subcommands().front()->get_name();
  if (tol > 0.0) options.tol = tol;
#ifdef _OPENMP
  if (options.threads > 0) omp_set_num_threads(options.threads);
#endif
  return smallbody::run_command(options, std::cout);
}
