#pragma once

#include <iosfwd>
#include <string>

#include "rpc/config.hpp"

namespace rpc {

/// Process exit codes shared by the CLI entry points.
enum ExitCode : int {
  kExitGoalReached = 0,
  kExitConfigError = 1,
  kExitUnsafe = 2,
  kExitStalled = 3,
};

/// Plan a path, drive the full control loop, and write every artifact into
/// config.output_dir: the resolved config, path.json, trajectory.csv,
/// outer.jsonl, cycles.jsonl, clouds.jsonl, summary.json, and plots/.
/// Returns the exit code for the run outcome.
/// @throws ConfigError on invalid configuration or an infeasible path
int run_scenario(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Planner only: writes the resolved config and path.json.
/// Returns kExitGoalReached on a feasible path, kExitStalled otherwise.
int plan_scenario(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Re-render plots/ from the logs a previous run left in run_dir.
/// @throws MissingLogError when a required log file is absent
int plot_run(const std::string& run_dir, std::ostream& out, std::ostream& err);

/// CLI wrappers: parse/validate, dispatch, and map ConfigError and missing
/// logs onto stderr lines of the form `error: <key>: <reason>` with exit
/// code 1.
int cli_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cli_plan(const std::string& config_path, std::ostream& out, std::ostream& err);
int cli_plot(const std::string& run_dir, std::ostream& out, std::ostream& err);

}  // namespace rpc
