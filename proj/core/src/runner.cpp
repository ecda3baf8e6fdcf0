#include "rpc/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rpc/control_loop.hpp"
#include "rpc/errors.hpp"
#include "rpc/plot.hpp"

namespace fs = std::filesystem;

namespace rpc {

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output_dir: cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingLogError(path.string() + ": missing log file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
}

/// Smallest distance-to-surface over all samples and obstacles, measured
/// against the physical radius (the clearance margin is a planning budget,
/// not part of the unsafe set).
double min_clearance(const TrajectoryLog& log, const Scenario& scenario) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : log.samples) {
    const Eigen::Vector2d pos(s.state(2), s.state(3));
    for (const Obstacle& ob : scenario.obstacles)
      best = std::min(best, (pos - ob.center).norm() - ob.radius);
  }
  return best;
}

nlohmann::json summarize(const RpcResult& result, const TrajectoryLog& log,
                         const Scenario& scenario) {
  double v_min = scenario.v0, v_max = scenario.v0;
  for (const auto& s : log.samples) {
    v_min = std::min(v_min, s.state(1));
    v_max = std::max(v_max, s.state(1));
  }
  double wall = 0.0;
  for (const OuterLogEntry& e : result.outer) wall += e.wall_time_s;
  if (!result.outer.empty()) wall /= static_cast<double>(result.outer.size());

  nlohmann::json j;
  j["outcome"] = to_string(result.outcome);
  j["goal_error"] = result.goal_error;
  const double clearance = min_clearance(log, scenario);
  if (std::isfinite(clearance))
    j["min_clearance"] = clearance;
  else
    j["min_clearance"] = nullptr;
  j["v_min"] = v_min;
  j["v_max"] = v_max;
  j["wall_per_iteration_s"] = wall;
  j["outer_iterations"] = result.outer.size();
  if (result.breach)
    j["cause"] = result.breach->reason;
  else
    j["cause"] = result.stall_cause;
  return j;
}

WaypointPath plan_and_save(const RunConfig& config, const fs::path& dir,
                           std::ostream& err) {
  report_warnings(config.validate(), err);
  fs::create_directories(dir);
  write_file(dir / "config.yaml", serialize_run_config(config));
  const WaypointPath path = optimize_path(config.scenario);
  write_file(dir / "path.json", path.to_json() + "\n");
  return path;
}

void write_plots(const fs::path& dir, const Scenario& scenario, const WaypointPath& path,
                 const TrajectoryLog& log, const std::vector<ReachCloud>& clouds) {
  fs::create_directories(dir / "plots");
  write_file(dir / "plots" / "path.svg", render_path_svg(scenario, path, log, clouds));
  write_file(dir / "plots" / "velocity.svg", render_velocity_svg(scenario, log));
  write_file(dir / "plots" / "clouds.svg", render_clouds_svg(scenario, path, clouds));
}

}  // namespace

int run_scenario(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const fs::path dir(config.output_dir);
  const WaypointPath path = plan_and_save(config, dir, err);
  if (!path.feasible)
    throw ConfigError("scenario: planner found no feasible path around the obstacles");

  const Eigen::Vector4d state0(config.scenario.theta0, config.scenario.v0,
                               config.scenario.start.x(), config.scenario.start.y());
  BicyclePlant plant(state0, config.plant, config.scenario.terrain, config.plant_step);
  const RpcResult result = algorithm2(plant, config.scenario, path, config.rpc_config());

  plant.log().write_csv_file((dir / "trajectory.csv").string());
  {
    std::ostringstream lines;
    for (const OuterLogEntry& e : result.outer) lines << e.to_json() << '\n';
    write_file(dir / "outer.jsonl", lines.str());
  }
  {
    std::ostringstream lines;
    for (const CycleLogEntry& e : result.cycles) lines << e.to_json() << '\n';
    write_file(dir / "cycles.jsonl", lines.str());
  }
  {
    std::ostringstream lines;
    for (const ReachCloud& c : result.snapshots) lines << c.to_json() << '\n';
    write_file(dir / "clouds.jsonl", lines.str());
  }
  const nlohmann::json summary = summarize(result, plant.log(), config.scenario);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_plots(dir, config.scenario, path, plant.log(), result.snapshots);

  out << "outcome: " << to_string(result.outcome) << "  goal_error: " << result.goal_error
      << "  outer_iterations: " << result.outer.size() << '\n';
  if (result.breach)
    err << "unsafe: " << result.breach->reason << " at t=" << result.breach->t << '\n';
  if (result.outcome == RpcOutcome::Stalled) err << "stalled: " << result.stall_cause << '\n';

  switch (result.outcome) {
    case RpcOutcome::GoalReached:
      return kExitGoalReached;
    case RpcOutcome::Unsafe:
      return kExitUnsafe;
    case RpcOutcome::Stalled:
      return kExitStalled;
  }
  return kExitConfigError;
}

int plan_scenario(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const WaypointPath path = plan_and_save(config, fs::path(config.output_dir), err);
  out << "feasible: " << (path.feasible ? "true" : "false")
      << "  objective: " << path.objective << "  waypoints: " << path.points.size() << '\n';
  if (!path.feasible) {
    err << "stalled: planner found no feasible path around the obstacles\n";
    return kExitStalled;
  }
  return kExitGoalReached;
}

int plot_run(const std::string& run_dir, std::ostream& out, std::ostream& err) {
  (void)err;
  const fs::path dir(run_dir);
  const RunConfig config =
      parse_run_config_text(read_file(dir / "config.yaml"), /*apply_env=*/false);
  const WaypointPath path = WaypointPath::from_json(read_file(dir / "path.json"));
  const TrajectoryLog log = TrajectoryLog::read_csv_file((dir / "trajectory.csv").string());

  std::vector<ReachCloud> clouds;
  if (fs::exists(dir / "clouds.jsonl")) {
    std::istringstream lines(read_file(dir / "clouds.jsonl"));
    std::string line;
    while (std::getline(lines, line))
      if (!line.empty()) clouds.push_back(ReachCloud::from_json(line));
  }

  write_plots(dir, config.scenario, path, log, clouds);
  out << "plots written to " << (dir / "plots").string() << '\n';
  return kExitGoalReached;
}

namespace {

template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const MissingLogError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace

int cli_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded([&] { return run_scenario(parse_run_config(config_path), out, err); }, err);
}

int cli_plan(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded([&] { return plan_scenario(parse_run_config(config_path), out, err); },
                 err);
}

int cli_plot(const std::string& run_dir, std::ostream& out, std::ostream& err) {
  return guarded([&] { return plot_run(run_dir, out, err); }, err);
}

}  // namespace rpc
