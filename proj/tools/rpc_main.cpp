#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rpc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Guaranteed-reachability vehicle control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;

  CLI::App* run = app.add_subcommand("run", "plan a path and drive the full control loop");
  run->add_option("config", config_path, "YAML run configuration")->required();

  CLI::App* plan = app.add_subcommand("plan", "run the path planner only");
  plan->add_option("config", config_path, "YAML run configuration")->required();

  CLI::App* plot = app.add_subcommand("plot", "re-render plots from a finished run");
  plot->add_option("run-dir", run_dir, "directory a previous run wrote")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return rpc::cli_run(config_path, std::cout, std::cerr);
  if (plan->parsed()) return rpc::cli_plan(config_path, std::cout, std::cerr);
  return rpc::cli_plot(run_dir, std::cout, std::cerr);
}
