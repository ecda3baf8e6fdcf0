#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpc/planner.hpp"
#include "rpc/reach.hpp"
#include "rpc/synth.hpp"

namespace rpc {

/// Table-row condition that selected the current target.
enum class StrategyCondition {
  PathIntersectAndSlow,  ///< lookahead touches the path, v at the low edge
  PathIntersectAndFast,  ///< lookahead touches the path, v at the high edge
  LeftOfPath,            ///< no intersection, vehicle left of the path
  RightOfPath,           ///< no intersection, vehicle right of the path
  OnCourse,              ///< intersection with v mid-corridor
};

enum class StrategyAction { IncreaseV, ZeroInput, DecreaseTheta, IncreaseTheta, HoldCourse };

struct TargetChoice {
  Eigen::VectorXd target;  ///< actuated target, from the guaranteed cloud
  StrategyCondition condition = StrategyCondition::OnCourse;
  StrategyAction action = StrategyAction::HoldCourse;
  std::string rule;  ///< short name for the outer log
};

/// Time-indexed actuated input-ball radius for the unactuated reach set:
/// the spherical-proxy radius when the guaranteed gain beats the drift,
/// else the degenerate zero envelope (pure drift advection).
RadiusEnvelope make_radius_envelope(const LocalModel& model);

/// Positions reachable within n_tilde chained horizons of length T: each
/// level translates the single-horizon cloud to the boundary points of the
/// previous level (the model values are anchor-invariant by construction,
/// which is what justifies reusing one cloud). Returns the union across
/// levels, boundary-subsampled per level to keep growth bounded.
/// @throws NearRestError, RestViolationError from the base cloud
ReachCloud lookahead_cloud(const LocalModel& model, const LipschitzBounds& bounds, double T,
                           int n_tilde, int n_samples, std::uint64_t seed);

/// Shortest distance from a point to the waypoint polyline.
double path_distance(const WaypointPath& path, const Eigen::Vector2d& pos);

/// True when any cloud point comes within tol of any path segment.
bool cloud_intersects_path(const ReachCloud& cloud, const WaypointPath& path, double tol);

/// First-match strategy over the Table rows, in order: (1) lookahead
/// intersects the path and v <= v_lo + 0.1 -> boundary point of maximal v;
/// (2) intersects and v >= v_hi - 0.1 -> zero input; (3) no intersection,
/// vehicle left of the path -> steer the heading down toward a rejoin point
/// ahead; (4) right of the path -> symmetric; fallback -> hold v, steer to
/// the path tangent. Targets always come from the actuated cloud.
/// @throws EmptyCloudError
TargetChoice choose_target(const ReachCloud& actuated, const ReachCloud& lookahead,
                           const WaypointPath& path, const PartitionedState& state,
                           double v_lo, double v_hi);

enum class RpcOutcome { GoalReached, Unsafe, Stalled };

const char* to_string(RpcOutcome o);

/// One line of the outer-loop log.
struct OuterLogEntry {
  int n_hat = 0;
  Eigen::VectorXd anchor;  ///< full state at iteration start
  Eigen::VectorXd target;  ///< chosen actuated target
  double r = 0.0;          ///< actuated step radius at this anchor
  double r_bar = 0.0;      ///< unactuated cloud radius at this anchor
  std::string rule_fired;
  double wall_time_s = 0.0;

  std::string to_json() const;
};

struct RpcConfig {
  double dt = 0.015;
  double eps = 0.1;
  int k = 5;
  double horizon = 0.1;  ///< reach horizon T
  int n_tilde = 5;       ///< lookahead chaining depth
  LipschitzBounds bounds;
  int cloud_samples = 512;
  std::uint64_t seed = 0;
  int max_outer = 10000;

  /// @throws ConfigError
  void validate() const;
};

struct RpcResult {
  RpcOutcome outcome = RpcOutcome::Stalled;
  std::vector<OuterLogEntry> outer;
  std::vector<CycleLogEntry> cycles;
  double goal_error = 0.0;
  std::optional<SafetyBreach> breach;
  std::string stall_cause;
  std::vector<ReachCloud> snapshots;  ///< subsampled clouds for plotting
};

/// The outer control loop: bootstrap a local model with a zero-base
/// learning cycle, then repeatedly compute guaranteed reach clouds at the
/// current anchor, choose an actuated target by the strategy table, track
/// it with the inner loop, and re-anchor — until the position is within
/// r_bar of the goal. A safety monitor installed on the plant halts on
/// corridor violation or obstacle collision (outcome Unsafe). A no-progress
/// window of three outer iterations, exhausted inner retries (at halved dt),
/// or the outer cap report Stalled.
RpcResult algorithm2(BicyclePlant& plant, const Scenario& scenario, const WaypointPath& path,
                     const RpcConfig& cfg);

}  // namespace rpc
