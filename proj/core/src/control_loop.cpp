#include "rpc/control_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "rpc/errors.hpp"
#include "rpc/learn.hpp"
#include "rpc/rng.hpp"

namespace rpc {

namespace {

double wrap_angle(double a) { return std::atan2(std::sin(a), std::cos(a)); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, int n) {
  RandomStream root(seed, tag);
  RandomStream sub = root.substream(static_cast<std::uint64_t>(n));
  return sub.next_u64();
}

Eigen::Vector2d as_vec2(const Eigen::VectorXd& v) { return Eigen::Vector2d(v(0), v(1)); }

struct PathProjection {
  int segment = 0;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double arclength = 0.0;  ///< along the polyline up to the projection
  double distance = 0.0;
};

double segment_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& p, Eigen::Vector2d* closest = nullptr,
                        double* t_out = nullptr) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Eigen::Vector2d q = a + t * d;
  if (closest) *closest = q;
  if (t_out) *t_out = t;
  return (p - q).norm();
}

PathProjection project_to_path(const WaypointPath& path, const Eigen::Vector2d& pos) {
  PathProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double s_before = 0.0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
    Eigen::Vector2d q;
    double t = 0.0;
    const double dist = segment_distance(path.points[i], path.points[i + 1], pos, &q, &t);
    const double seg_len = (path.points[i + 1] - path.points[i]).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.segment = static_cast<int>(i);
      best.point = q;
      best.arclength = s_before + t * seg_len;
    }
    s_before += seg_len;
  }
  return best;
}

Eigen::Vector2d path_point_at_arclength(const WaypointPath& path, double s) {
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
    const double seg_len = (path.points[i + 1] - path.points[i]).norm();
    if (walked + seg_len >= s && seg_len > 0.0) {
      const double t = std::clamp((s - walked) / seg_len, 0.0, 1.0);
      return path.points[i] + t * (path.points[i + 1] - path.points[i]);
    }
    walked += seg_len;
  }
  return path.points.back();
}

Eigen::Vector2d segment_direction(const WaypointPath& path, int segment) {
  const Eigen::Vector2d d = path.points[static_cast<std::size_t>(segment) + 1] -
                            path.points[static_cast<std::size_t>(segment)];
  const double len = d.norm();
  return len > 0.0 ? Eigen::Vector2d(d / len) : Eigen::Vector2d(1.0, 0.0);
}

/// Keep at most `cap` points that outline the cloud: the farthest point
/// from the center per angular sector (dim 2), or the two extremes (dim 1).
std::vector<Eigen::VectorXd> boundary_subsample(const std::vector<Eigen::VectorXd>& pts,
                                                const Eigen::VectorXd& center, int cap) {
  if (static_cast<int>(pts.size()) <= cap) return pts;
  if (center.size() == 1) {
    Eigen::VectorXd lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
      if (p(0) < lo(0)) lo = p;
      if (p(0) > hi(0)) hi = p;
    }
    return {lo, hi};
  }
  std::vector<int> best(static_cast<std::size_t>(cap), -1);
  std::vector<double> best_r(static_cast<std::size_t>(cap), -1.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector2d d = as_vec2(pts[i]) - as_vec2(center);
    const double ang = std::atan2(d.y(), d.x());
    int sector = static_cast<int>((ang + M_PI) / (2.0 * M_PI) * cap);
    sector = std::clamp(sector, 0, cap - 1);
    const double r = d.norm();
    if (r > best_r[static_cast<std::size_t>(sector)]) {
      best_r[static_cast<std::size_t>(sector)] = r;
      best[static_cast<std::size_t>(sector)] = static_cast<int>(i);
    }
  }
  std::vector<Eigen::VectorXd> out;
  for (int idx : best) {
    if (idx >= 0) out.push_back(pts[static_cast<std::size_t>(idx)]);
  }
  return out;
}

ReachCloud subsample_cloud(const ReachCloud& cloud, int cap) {
  if (static_cast<int>(cloud.points.size()) <= cap) return cloud;
  ReachCloud out = cloud;
  out.points.clear();
  const std::size_t stride = (cloud.points.size() + static_cast<std::size_t>(cap) - 1) /
                             static_cast<std::size_t>(cap);
  for (std::size_t i = 0; i < cloud.points.size(); i += stride) {
    out.points.push_back(cloud.points[i]);
  }
  return out;
}

}  // namespace

RadiusEnvelope make_radius_envelope(const LocalModel& model) {
  const ProxyParams p = ProxyParams::from_model(model);
  if (p.b_tilde() <= 0.0) {
    // Drift dominates the guaranteed gain: no actuated ball is guaranteed,
    // so the unactuated set degenerates to pure drift advection.
    return [](double) { return 0.0; };
  }
  return [p](double t) { return spherical_radius(p, t); };
}

ReachCloud lookahead_cloud(const LocalModel& model, const LipschitzBounds& bounds, double T,
                           int n_tilde, int n_samples, std::uint64_t seed) {
  if (n_tilde < 1) throw ConfigError("lookahead.n_tilde: must be at least 1");
  const RadiusEnvelope env = make_radius_envelope(model);
  const ReachCloud base = grs_unactuated(model, bounds, T, env, n_samples, seed);

  ReachCloud out;
  out.kind = "union";
  out.horizon = n_tilde * T;
  out.center = base.center;
  out.seed = seed;

  std::vector<Eigen::VectorXd> anchors = {base.center};
  for (int level = 0; level < n_tilde; ++level) {
    std::vector<Eigen::VectorXd> translated;
    translated.reserve(anchors.size() * base.points.size());
    for (const auto& a : anchors) {
      const Eigen::VectorXd delta = a - base.center;
      for (const auto& p : base.points) translated.push_back(p + delta);
    }
    out.points.insert(out.points.end(), translated.begin(), translated.end());
    anchors = boundary_subsample(translated, base.center, 64);
  }
  if (out.points.size() > 4096) {
    const std::size_t stride = (out.points.size() + 4095) / 4096;
    std::vector<Eigen::VectorXd> kept;
    for (std::size_t i = 0; i < out.points.size(); i += stride) kept.push_back(out.points[i]);
    out.points = std::move(kept);
  }
  return out;
}

double path_distance(const WaypointPath& path, const Eigen::Vector2d& pos) {
  return project_to_path(path, pos).distance;
}

bool cloud_intersects_path(const ReachCloud& cloud, const WaypointPath& path, double tol) {
  for (const auto& p : cloud.points) {
    const Eigen::Vector2d q = as_vec2(p);
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
      if (segment_distance(path.points[i], path.points[i + 1], q) <= tol) return true;
    }
  }
  return false;
}

TargetChoice choose_target(const ReachCloud& actuated, const ReachCloud& lookahead,
                           const WaypointPath& path, const PartitionedState& state,
                           double v_lo, double v_hi) {
  if (actuated.points.empty()) throw EmptyCloudError("choose_target: empty actuated cloud");

  const double theta = state.actuated()(0);
  const double v = state.actuated()(1);
  const Eigen::Vector2d pos = as_vec2(state.unactuated());
  const double mid = 0.5 * (v_lo + v_hi);
  const double slow = std::min(v_lo + 0.1, mid);
  const double fast = std::max(v_hi - 0.1, mid);

  const bool intersects = cloud_intersects_path(lookahead, path, 1e-2);
  const PathProjection proj = project_to_path(path, pos);
  double look_radius = 0.0;
  for (const auto& p : lookahead.points) {
    look_radius = std::max(look_radius, (as_vec2(p) - as_vec2(lookahead.center)).norm());
  }
  const double rejoin_dist = std::max(1.0, 2.0 * look_radius);
  const Eigen::Vector2d aim = path_point_at_arclength(path, proj.arclength + rejoin_dist);
  const Eigen::Vector2d to_aim = aim - pos;
  const double theta_rejoin =
      to_aim.norm() > 1e-9 ? std::atan2(to_aim.y(), to_aim.x()) : theta;
  const Eigen::Vector2d tangent = segment_direction(path, proj.segment);
  const double theta_tangent = std::atan2(tangent.y(), tangent.x());

  const auto pick_floor = [&](double theta_des, double v_des,
                              double v_floor) -> Eigen::VectorXd {
    const Eigen::VectorXd* best = nullptr;
    double best_val = std::numeric_limits<double>::infinity();
    for (const auto& p : actuated.points) {
      if (p(1) < v_floor) continue;
      const double dth = wrap_angle(p(0) - theta_des);
      const double dv = p(1) - v_des;
      const double val = dth * dth + dv * dv;
      if (val < best_val) {
        best_val = val;
        best = &p;
      }
    }
    return best ? *best : actuated.points.front();
  };
  TargetChoice choice;
  if (intersects && v <= slow) {
    double v_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : actuated.points) v_max = std::max(v_max, p(1));
    const double band = v_max - 0.1 * std::max(v_max - v, 0.0) - 1e-12;
    const Eigen::VectorXd* best = &actuated.points.front();
    double best_dth = std::numeric_limits<double>::infinity();
    for (const auto& p : actuated.points) {
      if (p(1) < band) continue;
      const double dth = std::abs(wrap_angle(p(0) - theta_rejoin));
      if (dth < best_dth) {
        best_dth = dth;
        best = &p;
      }
    }
    choice.target = *best;
    choice.condition = StrategyCondition::PathIntersectAndSlow;
    choice.action = StrategyAction::IncreaseV;
    choice.rule = "increase_v";
    return choice;
  }
  if (intersects && v >= fast) {
    choice.target = state.actuated();
    choice.condition = StrategyCondition::PathIntersectAndFast;
    choice.action = StrategyAction::ZeroInput;
    choice.rule = "zero_input";
    return choice;
  }
  if (!intersects) {
    const Eigen::Vector2d offset = pos - proj.point;
    const double cross = tangent.x() * offset.y() - tangent.y() * offset.x();
    // Steering back to the path must not silently brake: below mid-corridor
    // the best theta match is taken among points that keep speed.
    choice.target = pick_floor(theta_rejoin, mid, std::min(v, mid) - 1e-3);
    if (cross >= 0.0) {
      choice.condition = StrategyCondition::LeftOfPath;
      choice.action = StrategyAction::DecreaseTheta;
      choice.rule = "decrease_theta";
    } else {
      choice.condition = StrategyCondition::RightOfPath;
      choice.action = StrategyAction::IncreaseTheta;
      choice.rule = "increase_theta";
    }
    return choice;
  }
  // Holding velocity must never become deliberate braking: picking a cloud
  // point marginally below the current speed would spend input authority
  // pushing v down on top of the rolling-resistance drift.
  choice.target = pick_floor(theta_tangent, v, v - 1e-3);
  choice.condition = StrategyCondition::OnCourse;
  choice.action = StrategyAction::HoldCourse;
  choice.rule = "hold_course";
  return choice;
}

const char* to_string(RpcOutcome o) {
  switch (o) {
    case RpcOutcome::GoalReached: return "GoalReached";
    case RpcOutcome::Unsafe: return "Unsafe";
    case RpcOutcome::Stalled: return "Stalled";
  }
  return "Unknown";
}

std::string OuterLogEntry::to_json() const {
  nlohmann::json j;
  j["n_hat"] = n_hat;
  j["anchor"] = std::vector<double>(anchor.data(), anchor.data() + anchor.size());
  j["target"] = std::vector<double>(target.data(), target.data() + target.size());
  j["r"] = r;
  j["r_bar"] = r_bar;
  j["rule_fired"] = rule_fired;
  j["wall_time_s"] = wall_time_s;
  return j.dump();
}

void RpcConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("rpc.dt: must be positive");
  if (!(eps > 0.0) || eps >= 1.0) throw ConfigError("rpc.eps: must lie in (0, 1)");
  if (k < 1) throw ConfigError("rpc.k: must be at least 1");
  if (!(horizon > 0.0)) throw ConfigError("rpc.horizon: must be positive");
  if (n_tilde < 1) throw ConfigError("rpc.n_tilde: must be at least 1");
  if (cloud_samples < 1) throw ConfigError("rpc.cloud_samples: must be at least 1");
  if (max_outer < 1) throw ConfigError("rpc.max_outer: must be at least 1");
  bounds.validate();
}

RpcResult algorithm2(BicyclePlant& plant, const Scenario& scenario, const WaypointPath& path,
                     const RpcConfig& cfg) {
  cfg.validate();
  scenario.validate();
  if (!path.feasible || path.points.size() < 2) {
    throw ConfigError("path: refusing to run on an infeasible waypoint path");
  }

  plant.set_monitor([&scenario](double, const PartitionedState& s) -> std::optional<std::string> {
    const double v = s.actuated()(1);
    if (v < scenario.v_lo - 1e-9 || v > scenario.v_hi + 1e-9) {
      return "velocity " + std::to_string(v) + " outside corridor [" +
             std::to_string(scenario.v_lo) + ", " + std::to_string(scenario.v_hi) + "]";
    }
    const Eigen::Vector2d pos = as_vec2(s.unactuated());
    for (std::size_t k = 0; k < scenario.obstacles.size(); ++k) {
      if ((pos - scenario.obstacles[k].center).norm() < scenario.obstacles[k].radius) {
        return "collision with obstacle " + std::to_string(k);
      }
    }
    return std::nullopt;
  });

  RpcResult result;
  const Eigen::Vector2d goal = scenario.goal;
  const int m = plant.input_dim();
  const double h = plant.step();

  const auto round_dt = [&](double dt) {
    return std::max(h, std::llround(dt / h) * h);
  };
  const auto unsafe_exit = [&]() {
    result.outcome = RpcOutcome::Unsafe;
    result.breach = plant.breach();
    result.goal_error = (as_vec2(plant.state().unactuated()) - goal).norm();
    return result;
  };
  const auto stalled_exit = [&](const std::string& cause) {
    result.outcome = RpcOutcome::Stalled;
    result.stall_cause = cause;
    result.goal_error = (as_vec2(plant.state().unactuated()) - goal).norm();
    return result;
  };

  int dt_shrink = 0;
  // Bootstrap the first local model with a zero-base learning cycle.
  const auto learn_here = [&](double dt_eff) -> std::optional<LocalModel> {
    const CycleRecord rec =
        run_cycle(plant, ControlInput::zero(m), cfg.eps, dt_eff);
    if (plant.breach().has_value()) return std::nullopt;
    return identify_local_model(rec, cfg.bounds);
  };

  LocalModel model;
  try {
    const auto boot = learn_here(round_dt(cfg.dt));
    if (!boot) return unsafe_exit();
    model = *boot;
  } catch (const DegenerateGainError& e) {
    return stalled_exit(std::string("bootstrap identification failed: ") + e.what());
  }

  int no_progress = 0;
  int snapshot_stride = 10;
  int since_snapshot = snapshot_stride;  // capture the first iteration

  for (int n_hat = 0; n_hat < cfg.max_outer; ++n_hat) {
    const auto t_start = std::chrono::steady_clock::now();
    const PartitionedState anchor = plant.state();
    const Eigen::Vector2d pos = as_vec2(anchor.unactuated());

    const double dt_eff = round_dt(cfg.dt / static_cast<double>(1 << dt_shrink));
    const ProxyParams proxy = ProxyParams::from_model(model);
    const RadiusEnvelope env = make_radius_envelope(model);
    ReachCloud act, un, look;
    try {
      act = grs_actuated(proxy, cfg.horizon, cfg.cloud_samples,
                         derive_seed(cfg.seed, 11, n_hat));
      un = grs_unactuated(model, cfg.bounds, cfg.horizon, env, cfg.cloud_samples,
                          derive_seed(cfg.seed, 13, n_hat));
      look = lookahead_cloud(model, cfg.bounds, cfg.horizon, cfg.n_tilde, 64,
                             derive_seed(cfg.seed, 17, n_hat));
    } catch (const Error& e) {
      // No guaranteed set exists for this model. The typical cause is a
      // learning cycle that straddled a terrain change, so the finite
      // differences mixed two different dynamics; a fresh cycle fully
      // inside the new regime usually heals it.
      OuterLogEntry entry;
      entry.n_hat = n_hat;
      entry.anchor = anchor.full();
      entry.target = anchor.actuated();
      entry.rule_fired = "model_refresh";
      const auto push_entry = [&] {
        entry.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        result.outer.push_back(entry);
      };
      if (++dt_shrink > 4) {
        push_entry();
        return stalled_exit(std::string("guaranteed sets kept degenerating: ") + e.what());
      }
      try {
        // Half-length pieces keep the open-loop drift of the fix-up cycle
        // small; shorter differences also estimate more accurately.
        const auto fresh = learn_here(round_dt(0.5 * dt_eff));
        if (!fresh) {
          push_entry();
          return unsafe_exit();
        }
        model = *fresh;
      } catch (const Error& e2) {
        push_entry();
        return stalled_exit(std::string("model refresh failed: ") + e2.what());
      }
      push_entry();
      continue;
    }
    const double r_bar = un.max_radius();
    const SynthConfig scfg = make_synth_config(model, cfg.bounds, dt_eff, cfg.eps, cfg.k);

    if (++since_snapshot >= snapshot_stride) {
      since_snapshot = 0;
      result.snapshots.push_back(subsample_cloud(un, 64));
      result.snapshots.push_back(subsample_cloud(look, 64));
      if (result.snapshots.size() > 64) {
        std::vector<ReachCloud> kept;
        for (std::size_t i = 0; i < result.snapshots.size(); i += 2) {
          kept.push_back(result.snapshots[i]);
        }
        result.snapshots = std::move(kept);
        snapshot_stride *= 2;
      }
    }

    OuterLogEntry entry;
    entry.n_hat = n_hat;
    entry.anchor = anchor.full();
    entry.r = scfg.r;
    entry.r_bar = r_bar;

    const double goal_err = (pos - goal).norm();
    if (goal_err <= r_bar) {
      entry.target = anchor.actuated();
      entry.rule_fired = "goal_reached";
      entry.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      result.outer.push_back(entry);
      result.outcome = RpcOutcome::GoalReached;
      result.goal_error = goal_err;
      return result;
    }

    const TargetChoice choice =
        choose_target(act, look, path, anchor, scenario.v_lo, scenario.v_hi);
    entry.target = choice.target;
    entry.rule_fired = choice.rule;

    bool inner_failed = false;
    std::string fail_cause;
    if (choice.action == StrategyAction::ZeroInput) {
      try {
        const auto next = learn_here(dt_eff);
        if (!next) {
          entry.wall_time_s =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
          result.outer.push_back(entry);
          return unsafe_exit();
        }
        model = *next;
      } catch (const Error& e) {
        inner_failed = true;
        fail_cause = e.what();
      }
    } else {
      try {
        SynthResult inner = algorithm1(plant, model, cfg.bounds, choice.target, scfg);
        result.cycles.insert(result.cycles.end(), inner.cycles.begin(), inner.cycles.end());
        model = inner.model;
        switch (inner.termination) {
          case SynthTermination::Reached:
            break;
          case SynthTermination::Breached: {
            entry.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                    .count();
            result.outer.push_back(entry);
            return unsafe_exit();
          }
          case SynthTermination::NoIntersection:
          case SynthTermination::BudgetExceeded:
            inner_failed = true;
            fail_cause = to_string(inner.termination);
            break;
        }
      } catch (const Error& e) {
        // Mid-cycle identification failures leave the model stale; refresh
        // it with a zero-base cycle before the next attempt.
        inner_failed = true;
        fail_cause = e.what();
        try {
          const auto fresh = learn_here(round_dt(0.5 * dt_eff));
          if (!fresh) {
            entry.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                    .count();
            result.outer.push_back(entry);
            return unsafe_exit();
          }
          model = *fresh;
        } catch (const Error& e2) {
          entry.wall_time_s =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                  .count();
          result.outer.push_back(entry);
          return stalled_exit(std::string("model refresh failed: ") + e2.what());
        }
      }
    }

    entry.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.outer.push_back(entry);

    if (inner_failed) {
      ++dt_shrink;
      if (dt_shrink > 4) {
        return stalled_exit("inner tracking kept failing after dt retries: " + fail_cause);
      }
    } else {
      dt_shrink = 0;
    }

    const double moved = (as_vec2(plant.state().unactuated()) - pos).norm();
    if (moved < 1e-4) {
      if (++no_progress >= 3) return stalled_exit("no positional progress");
    } else {
      no_progress = 0;
    }
  }
  return stalled_exit("outer iteration cap reached");
}

}  // namespace rpc
