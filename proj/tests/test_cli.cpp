#include "rpc/runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rpc/errors.hpp"
#include "rpc/planner.hpp"
#include "rpc/plant.hpp"

namespace {

namespace fs = std::filesystem;

/// Short corridor that the controller finishes in a few seconds. The lone
/// obstacle sits far off the path so the plan stays straight but the
/// clearance readout is finite.
rpc::RunConfig corridor_config(const std::string& output_dir) {
  rpc::RunConfig c;
  c.seed = 42;
  c.output_dir = output_dir;
  c.dt = 0.005;
  c.eps = 0.1;
  c.k = 5;
  c.horizon = 0.1;
  c.n_tilde = 5;
  c.cloud_samples = 128;
  c.plant_step = 1e-3;
  c.lipschitz = {0.0, 4.0, 0.25};
  c.plant.l_r = 0.3;
  c.plant.wheelbase = 0.6;
  c.plant.mu = 0.9;
  c.plant.g = 9.81;
  c.plant.a_max = 8.0;
  c.scenario.start = Eigen::Vector2d(0.0, 0.0);
  c.scenario.goal = Eigen::Vector2d(4.0, 0.0);
  c.scenario.v0 = 2.5;
  c.scenario.theta0 = 0.0;
  c.scenario.v_lo = 2.2;
  c.scenario.v_hi = 2.8;
  c.scenario.clearance = 0.5;
  c.scenario.front_offset = 0.3;
  c.scenario.n_waypoints = 9;
  c.scenario.seed = 42;
  c.scenario.terrain.default_r_c = 0.2;
  c.scenario.obstacles.push_back({Eigen::Vector2d(2.0, 2.5), 0.5});
  return c;
}

/// Four inflated disks covering every point at front_offset from the goal
/// while leaving the goal itself clear: the final front-point constraint is
/// unsatisfiable for every heading, so the planner must report infeasibility.
rpc::RunConfig pocketed_config(const std::string& output_dir) {
  rpc::RunConfig c = corridor_config(output_dir);
  c.scenario.goal = Eigen::Vector2d(10.0, 0.0);
  c.scenario.n_waypoints = 21;
  c.scenario.clearance = 0.1;
  c.scenario.front_offset = 0.3;
  c.scenario.obstacles.clear();
  for (int k = 0; k < 4; ++k) {
    const double angle = M_PI * k / 2.0;
    c.scenario.obstacles.push_back(
        {c.scenario.goal + 0.45 * Eigen::Vector2d(std::cos(angle), std::sin(angle)),
         0.3});
  }
  return c;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_lines(const fs::path& path) {
  std::ifstream in(path);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("RPC_SEED");
    ::unsetenv("RPC_OUTPUT_DIR");
    dir_ = fs::temp_directory_path() /
           ("rpc_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out_dir(const std::string& leaf) const { return (dir_ / leaf).string(); }

  std::string write_config(const rpc::RunConfig& config, const std::string& name) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path);
    out << rpc::serialize_run_config(config);
    return path.string();
  }

  fs::path dir_;
};

TEST_F(CliRun, DrivesTheCorridorAndWritesEveryArtifact) {
  const rpc::RunConfig config = corridor_config(out_dir("run"));
  std::ostringstream out, err;
  const int code = rpc::run_scenario(config, out, err);
  EXPECT_EQ(code, rpc::kExitGoalReached);
  EXPECT_NE(out.str().find("outcome: GoalReached"), std::string::npos) << out.str();

  const fs::path run(config.output_dir);
  for (const char* name : {"config.yaml", "path.json", "trajectory.csv", "outer.jsonl",
                           "cycles.jsonl", "clouds.jsonl", "summary.json"}) {
    EXPECT_TRUE(fs::exists(run / name)) << name;
  }
  for (const char* name : {"path.svg", "velocity.svg", "clouds.svg"}) {
    EXPECT_TRUE(fs::exists(run / "plots" / name)) << name;
    EXPECT_NE(slurp(run / "plots" / name).find("<svg"), std::string::npos) << name;
  }

  const auto summary = nlohmann::json::parse(slurp(run / "summary.json"));
  EXPECT_EQ(summary.at("outcome"), "GoalReached");
  EXPECT_GE(summary.at("goal_error").get<double>(), 0.0);
  EXPECT_LT(summary.at("goal_error").get<double>(), 1.0);
  // The obstacle sits 2.5 m off the straight path with radius 0.5.
  EXPECT_GT(summary.at("min_clearance").get<double>(), 1.0);
  EXPECT_GE(summary.at("v_min").get<double>(), config.scenario.v_lo - 1e-6);
  EXPECT_LE(summary.at("v_max").get<double>(), config.scenario.v_hi + 1e-6);
  EXPECT_GT(summary.at("wall_per_iteration_s").get<double>(), 0.0);
  EXPECT_GE(summary.at("outer_iterations").get<int>(), 1);
  EXPECT_TRUE(summary.at("cause").is_string());

  // The resolved config round-trips and the logs agree with the summary.
  const rpc::RunConfig resolved = rpc::parse_run_config_text(slurp(run / "config.yaml"));
  EXPECT_EQ(resolved.seed, config.seed);
  EXPECT_EQ((resolved.scenario.goal - config.scenario.goal).norm(), 0.0);
  EXPECT_EQ(count_lines(run / "outer.jsonl"), summary.at("outer_iterations").get<int>());

  const rpc::TrajectoryLog log =
      rpc::TrajectoryLog::read_csv_file((run / "trajectory.csv").string());
  ASSERT_FALSE(log.samples.empty());
  EXPECT_DOUBLE_EQ(log.samples.front().t, 0.0);  // initial state row
  EXPECT_GT(log.samples.back().t, 0.0);
  EXPECT_GT(count_lines(run / "cycles.jsonl"), 0);
  EXPECT_GT(count_lines(run / "clouds.jsonl"), 0);
}

TEST_F(CliRun, RejectsAPocketedGoalScenario) {
  const rpc::RunConfig config = pocketed_config(out_dir("pocket"));
  std::ostringstream out, err;
  try {
    (void)rpc::run_scenario(config, out, err);
    FAIL() << "expected ConfigError";
  } catch (const rpc::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no feasible path"), std::string::npos);
  }

  // The planning artifacts survive the failure for post-mortems.
  const fs::path run(config.output_dir);
  EXPECT_TRUE(fs::exists(run / "config.yaml"));
  ASSERT_TRUE(fs::exists(run / "path.json"));
  const rpc::WaypointPath path = rpc::WaypointPath::from_json(slurp(run / "path.json"));
  EXPECT_FALSE(path.feasible);
}

TEST_F(CliRun, PlanOnlyWritesThePathArtifacts) {
  const rpc::RunConfig config = corridor_config(out_dir("plan"));
  std::ostringstream out, err;
  EXPECT_EQ(rpc::plan_scenario(config, out, err), rpc::kExitGoalReached);
  EXPECT_NE(out.str().find("feasible: true"), std::string::npos) << out.str();

  const fs::path run(config.output_dir);
  EXPECT_TRUE(fs::exists(run / "config.yaml"));
  EXPECT_TRUE(fs::exists(run / "path.json"));
  EXPECT_FALSE(fs::exists(run / "trajectory.csv"));

  const rpc::RunConfig pocket = pocketed_config(out_dir("plan_pocket"));
  std::ostringstream out2, err2;
  EXPECT_EQ(rpc::plan_scenario(pocket, out2, err2), rpc::kExitStalled);
  EXPECT_NE(err2.str().find("stalled:"), std::string::npos) << err2.str();
}

TEST_F(CliRun, PlotRerendersFromSavedLogs) {
  const rpc::RunConfig config = corridor_config(out_dir("replot"));
  std::ostringstream out, err;
  ASSERT_EQ(rpc::run_scenario(config, out, err), rpc::kExitGoalReached);

  const fs::path run(config.output_dir);
  fs::remove_all(run / "plots");
  ASSERT_FALSE(fs::exists(run / "plots" / "path.svg"));

  std::ostringstream out2, err2;
  EXPECT_EQ(rpc::plot_run(config.output_dir, out2, err2), rpc::kExitGoalReached);
  EXPECT_NE(out2.str().find("plots"), std::string::npos);
  for (const char* name : {"path.svg", "velocity.svg", "clouds.svg"}) {
    ASSERT_TRUE(fs::exists(run / "plots" / name)) << name;
  }

  // Re-rendering from the same logs is byte-stable.
  const std::string first = slurp(run / "plots" / "path.svg");
  std::ostringstream out3, err3;
  ASSERT_EQ(rpc::plot_run(config.output_dir, out3, err3), rpc::kExitGoalReached);
  EXPECT_EQ(slurp(run / "plots" / "path.svg"), first);
}

TEST_F(CliRun, PlotFailsWithoutLogs) {
  const std::string empty = out_dir("empty_logs");
  fs::create_directories(empty);
  std::ostringstream out, err;
  EXPECT_THROW((void)rpc::plot_run(empty, out, err), rpc::MissingLogError);

  std::ostringstream out2, err2;
  EXPECT_EQ(rpc::cli_plot(empty, out2, err2), rpc::kExitConfigError);
  EXPECT_NE(err2.str().find("missing log file"), std::string::npos) << err2.str();
}

TEST_F(CliRun, WrappersMapErrorsOntoStderrAndExitCodeOne) {
  std::ostringstream out, err;
  EXPECT_EQ(rpc::cli_run((dir_ / "absent.yaml").string(), out, err),
            rpc::kExitConfigError);
  EXPECT_NE(err.str().find("error: config: cannot open"), std::string::npos) << err.str();

  // An infeasible plan surfaces through the run wrapper the same way.
  const std::string pocket_yaml = write_config(
      pocketed_config(out_dir("wrap_pocket")), "pocket.yaml");
  std::ostringstream out2, err2;
  EXPECT_EQ(rpc::cli_run(pocket_yaml, out2, err2), rpc::kExitConfigError);
  EXPECT_NE(err2.str().find("error: scenario: planner found no feasible path"),
            std::string::npos)
      << err2.str();
}

TEST_F(CliRun, PlansFromAConfigFile) {
  const std::string yaml = write_config(corridor_config(out_dir("file_plan")),
                                        "plan.yaml");
  std::ostringstream out, err;
  EXPECT_EQ(rpc::cli_plan(yaml, out, err), rpc::kExitGoalReached);
  EXPECT_TRUE(fs::exists(fs::path(out_dir("file_plan")) / "path.json"));
}

}  // namespace
