#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rpc/plant.hpp"

namespace rpc {

/// Circular obstacle; the clearance margin is added on top of the radius.
struct Obstacle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

/// A complete navigation problem: endpoints, velocity corridor, obstacles,
/// terrain, and the waypoint discretization of the desired path.
struct Scenario {
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double v0 = 2.5;      ///< initial speed, must lie inside the corridor
  double theta0 = 0.0;  ///< initial heading
  double v_lo = 2.2;    ///< velocity corridor lower edge
  double v_hi = 2.8;    ///< velocity corridor upper edge
  double clearance = 0.5;     ///< obstacle inflation margin
  double front_offset = 0.3;  ///< half wheelbase, front-point lookahead
  int n_waypoints = 24;
  std::vector<Obstacle> obstacles;
  TerrainMap terrain;
  std::uint64_t seed = 0;

  /// Hard errors throw ConfigError (bad ranges, endpoints inside inflated
  /// obstacles, start speed outside the corridor); soft issues — e.g. the
  /// straight-line waypoint spacing exceeding the smallest obstacle radius,
  /// which can let the discrete path step over thin obstacles — come back
  /// as warnings.
  std::vector<std::string> validate() const;
};

/// Scatter `count` obstacles uniformly over the given box with radii in
/// [r_min, r_max], rejecting centers closer than radius + margin to any
/// keepout point (typically start and goal). Deterministic in the seed.
std::vector<Obstacle> scatter_obstacles(std::uint64_t seed, int count, double x_min,
                                        double x_max, double y_min, double y_max,
                                        double r_min, double r_max,
                                        const std::vector<Eigen::Vector2d>& keepout,
                                        double margin);

/// Optimized waypoint sequence with endpoints pinned to start and goal.
struct WaypointPath {
  std::vector<Eigen::Vector2d> points;
  bool feasible = false;
  double objective = 0.0;  ///< total squared segment length

  std::string to_json() const;
  static WaypointPath from_json(const std::string& text);
};

/// Waypoint i advanced by `offset` along its incoming segment direction;
/// index 0 has no incoming segment and maps to the waypoint itself.
/// @throws DegenerateSegmentError if the incoming segment is shorter
///         than 1e-9
Eigen::Vector2d front_point(const std::vector<Eigen::Vector2d>& points, int i,
                            double offset);

/// Minimize total squared segment length subject to every front point
/// clearing every inflated obstacle.
///
/// Initializes on the straight start-goal line, then iterates sequential
/// quadratic programming: exact quadratic objective, linearized clearance
/// constraints, a trust-region box, and an l1 exact-penalty merit that
/// never increases across accepted steps. Stops when the maximum clearance
/// violation is at most 1e-6 and the step norm at most 1e-8, or after 200
/// iterations; infeasibility is reported in the result, never thrown.
///
/// @param accepted_merit  optional diagnostic: (before, after) value of the
///        exact-penalty merit for every accepted step, at that step's
///        penalty weight
WaypointPath optimize_path(const Scenario& scenario,
                           std::vector<std::pair<double, double>>* accepted_merit = nullptr);

}  // namespace rpc
