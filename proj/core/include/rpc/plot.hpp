#pragma once

#include <string>
#include <vector>

#include "rpc/planner.hpp"
#include "rpc/plant.hpp"
#include "rpc/reach.hpp"

namespace rpc {

/// Scenario map: one inflated circle per obstacle, exactly three polylines
/// (planned path, driven trajectory, waypoint markers), and sampled
/// position-cloud points drawn as small squares. An empty trajectory log
/// renders axes only. Output is deterministic byte-for-byte in the inputs.
std::string render_path_svg(const Scenario& scenario, const WaypointPath& path,
                            const TrajectoryLog& log,
                            const std::vector<ReachCloud>& clouds);

/// Velocity profile v(t) over the corridor band; axes only when the log is
/// empty.
std::string render_velocity_svg(const Scenario& scenario, const TrajectoryLog& log);

/// Reach-cloud snapshots in the plane, palette-cycled per cloud, with the
/// planned path and obstacles for context; axes only when nothing to draw.
std::string render_clouds_svg(const Scenario& scenario, const WaypointPath& path,
                              const std::vector<ReachCloud>& clouds);

}  // namespace rpc
