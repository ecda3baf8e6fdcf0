#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <json.hpp>

#include "rpc/control_loop.hpp"
#include "rpc/errors.hpp"
#include "rpc/planner.hpp"
#include "rpc/plant.hpp"
#include "rpc/reach.hpp"
#include "rpc/types.hpp"

namespace rpc {
namespace {

const LipschitzBounds kBounds{0.0, 1.0, 0.25};

LocalModel cruising_model(double heading, double speed, const Eigen::Vector2d& pos,
                          const Eigen::Vector2d& drift = Eigen::Vector2d::Zero()) {
  Eigen::Vector4d full;
  full << heading, speed, pos.x(), pos.y();
  const PartitionedState anchor(full, 2);
  const Eigen::Vector2d unactuated_drift(speed * std::cos(heading),
                                         speed * std::sin(heading));
  return make_local_model(anchor, drift, Eigen::Matrix2d::Identity(), unactuated_drift,
                          kBounds);
}

WaypointPath straight_path(double length, int n = 2) {
  WaypointPath path;
  for (int i = 0; i < n; ++i) {
    path.points.emplace_back(length * i / (n - 1), 0.0);
  }
  path.feasible = true;
  path.objective = length * length / (n - 1);
  return path;
}

TEST(MakeRadiusEnvelope, FollowsTheGuaranteedBallGrowth) {
  const LocalModel model = cruising_model(0.0, 2.5, Eigen::Vector2d::Zero());
  const RadiusEnvelope env = make_radius_envelope(model);
  const ProxyParams p = ProxyParams::from_model(model);
  EXPECT_DOUBLE_EQ(env(0.0), 0.0);
  EXPECT_NEAR(env(0.1), spherical_radius(p, 0.1), 1e-15);
  EXPECT_NEAR(env(0.5), spherical_radius(p, 0.5), 1e-15);
}

TEST(MakeRadiusEnvelope, CollapsesWhenDriftDominates) {
  const LocalModel model =
      cruising_model(0.0, 2.5, Eigen::Vector2d::Zero(), Eigen::Vector2d(1.5, 0.0));
  ASSERT_LE(model.b_tilde, 0.0);
  const RadiusEnvelope env = make_radius_envelope(model);
  EXPECT_DOUBLE_EQ(env(0.1), 0.0);
  EXPECT_DOUBLE_EQ(env(10.0), 0.0);
}

TEST(LookaheadCloud, SingleLevelMatchesTheUnactuatedSet) {
  const LocalModel model = cruising_model(0.0, 2.5, Eigen::Vector2d(1.0, -1.0));
  const RadiusEnvelope env = make_radius_envelope(model);
  const ReachCloud base = grs_unactuated(model, kBounds, 0.1, env, 32, 5);
  const ReachCloud look = lookahead_cloud(model, kBounds, 0.1, 1, 32, 5);
  EXPECT_EQ(look.kind, "union");
  EXPECT_DOUBLE_EQ(look.horizon, 0.1);
  ASSERT_EQ(look.points.size(), base.points.size());
  for (std::size_t i = 0; i < base.points.size(); ++i) {
    EXPECT_EQ((look.points[i] - base.points[i]).norm(), 0.0);
  }
}

TEST(LookaheadCloud, ChainingExtendsTheSet) {
  const LocalModel model = cruising_model(0.0, 2.5, Eigen::Vector2d::Zero());
  const ReachCloud single = lookahead_cloud(model, kBounds, 0.1, 1, 32, 5);
  const ReachCloud chained = lookahead_cloud(model, kBounds, 0.1, 2, 32, 5);
  EXPECT_DOUBLE_EQ(chained.horizon, 0.2);
  ASSERT_GT(chained.points.size(), single.points.size());
  // The first level of the chain is the single-horizon set itself.
  for (std::size_t i = 0; i < single.points.size(); ++i) {
    EXPECT_EQ((chained.points[i] - single.points[i]).norm(), 0.0);
  }
  EXPECT_GE(chained.max_radius(), single.max_radius());
}

TEST(LookaheadCloud, RejectsZeroLevels) {
  const LocalModel model = cruising_model(0.0, 2.5, Eigen::Vector2d::Zero());
  EXPECT_THROW(lookahead_cloud(model, kBounds, 0.1, 0, 32, 5), ConfigError);
}

TEST(PathDistance, MeasuresLateralAndEndOverruns) {
  const WaypointPath path = straight_path(10.0);
  EXPECT_DOUBLE_EQ(path_distance(path, Eigen::Vector2d(3.0, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(path_distance(path, Eigen::Vector2d(3.0, 4.0)), 4.0);
  EXPECT_DOUBLE_EQ(path_distance(path, Eigen::Vector2d(12.0, 0.0)), 2.0);
  EXPECT_DOUBLE_EQ(path_distance(path, Eigen::Vector2d(-3.0, 0.0)), 3.0);
}

TEST(CloudIntersectsPath, UsesTheGivenTolerance) {
  const WaypointPath path = straight_path(10.0);
  ReachCloud cloud;
  cloud.center = Eigen::Vector2d(5.0, 0.1);
  cloud.points = {Eigen::Vector2d(5.0, 0.005)};
  EXPECT_TRUE(cloud_intersects_path(cloud, path, 1e-2));
  cloud.points = {Eigen::Vector2d(5.0, 0.02)};
  EXPECT_FALSE(cloud_intersects_path(cloud, path, 1e-2));
  EXPECT_TRUE(cloud_intersects_path(cloud, path, 0.05));
}

class ChooseTargetRows : public ::testing::Test {
 protected:
  static PartitionedState vehicle_state(double theta, double v, double x, double y) {
    Eigen::Vector4d full;
    full << theta, v, x, y;
    return PartitionedState(full, 2);
  }

  static ReachCloud actuated_cloud(const PartitionedState& state,
                                   const std::vector<Eigen::Vector2d>& pts) {
    ReachCloud cloud;
    cloud.kind = "actuated";
    cloud.horizon = 0.1;
    cloud.center = state.actuated();
    for (const auto& p : pts) cloud.points.push_back(p);
    return cloud;
  }

  static ReachCloud lookahead_at(const Eigen::Vector2d& pos,
                                 const std::vector<Eigen::Vector2d>& pts) {
    ReachCloud cloud;
    cloud.kind = "union";
    cloud.horizon = 0.5;
    cloud.center = pos;
    for (const auto& p : pts) cloud.points.push_back(p);
    return cloud;
  }

  const WaypointPath path_ = straight_path(10.0);
  const double v_lo_ = 2.2;
  const double v_hi_ = 2.8;
};

TEST_F(ChooseTargetRows, SlowOnPathSpeedsUpTowardTheRejoinHeading) {
  const PartitionedState state = vehicle_state(0.0, 2.25, 1.0, 0.0);
  // Band keeps only the fastest tenth: (0.0, 2.0) has the best heading but
  // must lose to the fast candidates.
  const ReachCloud act = actuated_cloud(
      state, {Eigen::Vector2d(0.5, 2.45), Eigen::Vector2d(0.1, 2.44),
              Eigen::Vector2d(0.0, 2.0)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.2, 0.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.condition, StrategyCondition::PathIntersectAndSlow);
  EXPECT_EQ(choice.action, StrategyAction::IncreaseV);
  EXPECT_EQ(choice.rule, "increase_v");
  EXPECT_TRUE(choice.target.isApprox(Eigen::Vector2d(0.1, 2.44)));
}

TEST_F(ChooseTargetRows, FastOnPathCoasts) {
  const PartitionedState state = vehicle_state(0.05, 2.75, 1.0, 0.0);
  const ReachCloud act =
      actuated_cloud(state, {Eigen::Vector2d(0.0, 2.9), Eigen::Vector2d(0.0, 2.5)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.2, 0.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.condition, StrategyCondition::PathIntersectAndFast);
  EXPECT_EQ(choice.action, StrategyAction::ZeroInput);
  EXPECT_EQ(choice.rule, "zero_input");
  EXPECT_TRUE(choice.target.isApprox(state.actuated()));
}

TEST_F(ChooseTargetRows, LeftOfThePathSteersBackWithoutBraking) {
  const PartitionedState state = vehicle_state(0.0, 2.5, 1.0, 0.5);
  // (-0.0555, 2.46) matches the rejoin heading almost exactly and would win
  // on distance alone, but it sits below the keep-speed floor.
  const ReachCloud act = actuated_cloud(
      state, {Eigen::Vector2d(-0.1, 2.5), Eigen::Vector2d(0.2, 2.5),
              Eigen::Vector2d(-0.0555, 2.46)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.5), {Eigen::Vector2d(1.0, 5.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.condition, StrategyCondition::LeftOfPath);
  EXPECT_EQ(choice.action, StrategyAction::DecreaseTheta);
  EXPECT_EQ(choice.rule, "decrease_theta");
  EXPECT_TRUE(choice.target.isApprox(Eigen::Vector2d(-0.1, 2.5)));
}

TEST_F(ChooseTargetRows, RightOfThePathSteersTheOtherWay) {
  const PartitionedState state = vehicle_state(0.0, 2.5, 1.0, -0.5);
  const ReachCloud act =
      actuated_cloud(state, {Eigen::Vector2d(0.1, 2.5), Eigen::Vector2d(-0.2, 2.5)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, -0.5), {Eigen::Vector2d(1.0, -5.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.condition, StrategyCondition::RightOfPath);
  EXPECT_EQ(choice.action, StrategyAction::IncreaseTheta);
  EXPECT_EQ(choice.rule, "increase_theta");
}

TEST_F(ChooseTargetRows, OnCourseHoldsHeadingAndNeverBrakes) {
  const PartitionedState state = vehicle_state(0.0, 2.5, 1.0, 0.0);
  // (0.05, 2.49) is the nearest point overall but sits below current speed.
  const ReachCloud act = actuated_cloud(
      state, {Eigen::Vector2d(0.05, 2.49), Eigen::Vector2d(0.0, 2.6),
              Eigen::Vector2d(0.4, 2.5)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.2, 0.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.condition, StrategyCondition::OnCourse);
  EXPECT_EQ(choice.action, StrategyAction::HoldCourse);
  EXPECT_EQ(choice.rule, "hold_course");
  EXPECT_TRUE(choice.target.isApprox(Eigen::Vector2d(0.0, 2.6)));
}

TEST_F(ChooseTargetRows, FallsBackToTheFirstPointWhenEverythingBrakes) {
  const PartitionedState state = vehicle_state(0.0, 2.5, 1.0, 0.0);
  const ReachCloud act = actuated_cloud(state, {Eigen::Vector2d(0.0, 2.0)});
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.2, 0.0)});
  const TargetChoice choice = choose_target(act, look, path_, state, v_lo_, v_hi_);
  EXPECT_EQ(choice.rule, "hold_course");
  EXPECT_TRUE(choice.target.isApprox(Eigen::Vector2d(0.0, 2.0)));
}

TEST_F(ChooseTargetRows, RejectsAnEmptyActuatedCloud) {
  const PartitionedState state = vehicle_state(0.0, 2.5, 1.0, 0.0);
  ReachCloud empty;
  empty.center = state.actuated();
  const ReachCloud look =
      lookahead_at(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.2, 0.0)});
  EXPECT_THROW(choose_target(empty, look, path_, state, v_lo_, v_hi_), EmptyCloudError);
}

TEST(RpcConfigValidate, RejectsBadKnobs) {
  RpcConfig cfg;
  cfg.bounds = LipschitzBounds{0.0, 4.0, 0.25};
  EXPECT_NO_THROW(cfg.validate());
  RpcConfig bad = cfg;
  bad.dt = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.eps = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.n_tilde = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.max_outer = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(OuterLogEntry, SerializesEveryField) {
  OuterLogEntry entry;
  entry.n_hat = 12;
  entry.anchor = Eigen::Vector4d(0.1, 2.5, 3.0, -0.2);
  entry.target = Eigen::Vector2d(0.05, 2.6);
  entry.r = 0.3;
  entry.r_bar = 0.25;
  entry.rule_fired = "hold_course";
  entry.wall_time_s = 0.01;
  const auto j = nlohmann::json::parse(entry.to_json());
  EXPECT_EQ(j.at("n_hat").get<int>(), 12);
  EXPECT_DOUBLE_EQ(j.at("anchor")[1].get<double>(), 2.5);
  EXPECT_DOUBLE_EQ(j.at("target")[1].get<double>(), 2.6);
  EXPECT_DOUBLE_EQ(j.at("r").get<double>(), 0.3);
  EXPECT_DOUBLE_EQ(j.at("r_bar").get<double>(), 0.25);
  EXPECT_EQ(j.at("rule_fired").get<std::string>(), "hold_course");
  EXPECT_DOUBLE_EQ(j.at("wall_time_s").get<double>(), 0.01);
}

class CorridorRun : public ::testing::Test {
 protected:
  static Scenario corridor_scenario() {
    Scenario s;
    s.start = Eigen::Vector2d(0.0, 0.0);
    s.goal = Eigen::Vector2d(6.0, 0.0);
    s.n_waypoints = 13;
    s.terrain.default_r_c = 0.2;
    return s;
  }

  static BicycleParams params() {
    BicycleParams p;
    p.l_r = 0.3;
    p.wheelbase = 0.6;
    p.mu = 0.9;
    p.g = 9.81;
    p.a_max = 8.0;
    return p;
  }

  static RpcConfig config(const Scenario& s) {
    RpcConfig cfg;
    cfg.dt = 0.005;
    cfg.eps = 0.1;
    cfg.k = 5;
    cfg.horizon = 0.1;
    cfg.n_tilde = 5;
    cfg.bounds = LipschitzBounds{0.0, 4.0, 0.25};
    cfg.cloud_samples = 128;
    cfg.seed = 42;
    cfg.max_outer = 10000;
    (void)s;
    return cfg;
  }
};

TEST_F(CorridorRun, DrivesAnEmptyCorridorToTheGoal) {
  const Scenario scenario = corridor_scenario();
  const WaypointPath path = optimize_path(scenario);
  ASSERT_TRUE(path.feasible);

  Eigen::Vector4d x0;
  x0 << scenario.theta0, scenario.v0, scenario.start.x(), scenario.start.y();
  BicyclePlant plant(x0, params(), scenario.terrain, 1e-3);
  const RpcResult result = algorithm2(plant, scenario, path, config(scenario));

  ASSERT_EQ(result.outcome, RpcOutcome::GoalReached)
      << "cause: " << result.stall_cause
      << (result.breach ? " breach: " + result.breach->reason : "");
  EXPECT_FALSE(plant.breach().has_value());
  ASSERT_FALSE(result.outer.empty());
  EXPECT_EQ(result.outer.back().rule_fired, "goal_reached");
  EXPECT_LE(result.goal_error, result.outer.back().r_bar + 1e-12);

  // Exactly one log entry per outer iteration, in order.
  for (std::size_t i = 0; i < result.outer.size(); ++i) {
    EXPECT_EQ(result.outer[i].n_hat, static_cast<int>(i));
    EXPECT_GE(result.outer[i].wall_time_s, 0.0);
  }

  // The guaranteed-progress invariant: the plant never left the velocity
  // corridor at any integrator sample.
  double v_min = scenario.v0, v_max = scenario.v0;
  for (const auto& s : plant.log().samples) {
    v_min = std::min(v_min, s.state(1));
    v_max = std::max(v_max, s.state(1));
  }
  EXPECT_GE(v_min, scenario.v_lo - 1e-9);
  EXPECT_LE(v_max, scenario.v_hi + 1e-9);

  EXPECT_FALSE(result.snapshots.empty());
  EXPECT_FALSE(result.cycles.empty());
}

TEST_F(CorridorRun, ReportsACorridorBreachAsUnsafe) {
  Scenario scenario = corridor_scenario();
  scenario.v_lo = 2.49;  // the zero-input drag of the first learning cycle
  scenario.v_hi = 2.51;  // already exhausts this corridor
  const WaypointPath path = optimize_path(scenario);
  Eigen::Vector4d x0;
  x0 << scenario.theta0, scenario.v0, scenario.start.x(), scenario.start.y();
  BicyclePlant plant(x0, params(), scenario.terrain, 1e-3);
  const RpcResult result = algorithm2(plant, scenario, path, config(scenario));
  EXPECT_EQ(result.outcome, RpcOutcome::Unsafe);
  ASSERT_TRUE(result.breach.has_value());
  EXPECT_NE(result.breach->reason.find("velocity"), std::string::npos);
}

TEST_F(CorridorRun, StallsWhenTheGainBoundForbidsIdentification) {
  const Scenario scenario = corridor_scenario();
  const WaypointPath path = optimize_path(scenario);
  Eigen::Vector4d x0;
  x0 << scenario.theta0, scenario.v0, scenario.start.x(), scenario.start.y();
  BicyclePlant plant(x0, params(), scenario.terrain, 1e-3);
  RpcConfig cfg = config(scenario);
  // With this Lipschitz claim every identified gain sits inside the cone the
  // bound allows to vanish, so no guaranteed model exists anywhere.
  cfg.bounds = LipschitzBounds{0.0, 40.0, 0.25};
  const RpcResult result = algorithm2(plant, scenario, path, cfg);
  EXPECT_EQ(result.outcome, RpcOutcome::Stalled);
  EXPECT_NE(result.stall_cause.find("bootstrap"), std::string::npos);
}

TEST_F(CorridorRun, RefusesAnInfeasiblePath) {
  const Scenario scenario = corridor_scenario();
  WaypointPath path = optimize_path(scenario);
  path.feasible = false;
  Eigen::Vector4d x0;
  x0 << scenario.theta0, scenario.v0, scenario.start.x(), scenario.start.y();
  BicyclePlant plant(x0, params(), scenario.terrain, 1e-3);
  EXPECT_THROW(algorithm2(plant, scenario, path, config(scenario)), ConfigError);
}

}  // namespace
}  // namespace rpc
