#include "rpc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "rpc/errors.hpp"
#include "rpc/rng.hpp"

namespace rpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dual active-set method (Goldfarb-Idnani) for
///   min 1/2 x'Gx + a'x   s.t.  C'x >= b,
/// with G positive definite. Returns the solution and the multipliers, or
/// nothing when the constraints are inconsistent. Matrices are recomputed
/// per step; fine for the small problems the planner builds.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> solve_qp(
    const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
    const Eigen::VectorXd& b) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(C.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  Eigen::VectorXd x = llt.solve(-a);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  if (m == 0) return std::make_pair(x, lam);

  std::vector<int> act;
  std::vector<bool> in_act(m, false);
  const double tol = 1e-11 * (1.0 + b.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 50 * (m + n + 1); ++outer) {
    int p = -1;
    double worst = -tol;
    for (int i = 0; i < m; ++i) {
      if (in_act[i]) continue;
      const double s = C.col(i).dot(x) - b(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) return std::make_pair(x, lam);

    double s_p = C.col(p).dot(x) - b(p);
    double lam_p = 0.0;
    for (int inner = 0; inner <= 2 * (m + n + 1); ++inner) {
      const int k = static_cast<int>(act.size());
      const Eigen::VectorXd gi_cp = llt.solve(C.col(p));
      Eigen::VectorXd z, r;
      if (k > 0) {
        Eigen::MatrixXd N(n, k);
        for (int j = 0; j < k; ++j) N.col(j) = C.col(act[static_cast<std::size_t>(j)]);
        const Eigen::MatrixXd gi_n = llt.solve(N);
        const Eigen::MatrixXd M = N.transpose() * gi_n;
        r = M.ldlt().solve(N.transpose() * gi_cp);
        z = gi_cp - gi_n * r;
      } else {
        z = gi_cp;
        r.resize(0);
      }
      const double czp = C.col(p).dot(z);
      const double t2 = czp > 1e-12 ? -s_p / czp : kInf;
      double t1 = kInf;
      int blocking = -1;
      for (int j = 0; j < k; ++j) {
        if (r(j) > 1e-12) {
          const double cand = lam(act[static_cast<std::size_t>(j)]) / r(j);
          if (cand < t1) {
            t1 = cand;
            blocking = j;
          }
        }
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return std::nullopt;

      for (int j = 0; j < k; ++j) lam(act[static_cast<std::size_t>(j)]) -= t * r(j);
      lam_p += t;
      if (std::isfinite(t2)) {
        x += t * z;
        s_p = C.col(p).dot(x) - b(p);
      }
      if (t2 <= t1) {
        lam(p) = lam_p;
        act.push_back(p);
        in_act[p] = true;
        break;
      }
      const int dropped = act[static_cast<std::size_t>(blocking)];
      lam(dropped) = 0.0;
      in_act[dropped] = false;
      act.erase(act.begin() + blocking);
    }
  }
  return std::make_pair(x, lam);
}

double path_objective(const std::vector<Eigen::Vector2d>& pts) {
  double j = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) j += (pts[i + 1] - pts[i]).squaredNorm();
  return j;
}

/// One clearance constraint g = |pf_i - c_k| - (r_k + margin) and its
/// gradient w.r.t. p_i and p_{i-1}. Degenerate incoming segments fall back
/// to the waypoint itself so a collapsing iterate cannot abort the solve.
struct ClearanceRow {
  double g = 0.0;
  Eigen::Vector2d d_pi = Eigen::Vector2d::Zero();
  Eigen::Vector2d d_prev = Eigen::Vector2d::Zero();
};

ClearanceRow clearance_row(const std::vector<Eigen::Vector2d>& pts, int i,
                           double offset, const Obstacle& ob, double margin) {
  const Eigen::Vector2d v = pts[static_cast<std::size_t>(i)] -
                            pts[static_cast<std::size_t>(i - 1)];
  const double len = v.norm();
  Eigen::Vector2d pf;
  Eigen::Matrix2d d_pf_pi = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d d_pf_prev = Eigen::Matrix2d::Zero();
  if (len >= 1e-9) {
    const Eigen::Vector2d dir = v / len;
    pf = pts[static_cast<std::size_t>(i)] + offset * dir;
    const Eigen::Matrix2d proj =
        (Eigen::Matrix2d::Identity() - dir * dir.transpose()) * (offset / len);
    d_pf_pi += proj;
    d_pf_prev -= proj;
  } else {
    pf = pts[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d diff = pf - ob.center;
  const double dist = std::max(diff.norm(), 1e-12);
  const Eigen::Vector2d ddist = diff / dist;
  ClearanceRow row;
  row.g = dist - (ob.radius + margin);
  row.d_pi = d_pf_pi.transpose() * ddist;
  row.d_prev = d_pf_prev.transpose() * ddist;
  return row;
}

}  // namespace

std::vector<std::string> Scenario::validate() const {
  if (!(v_lo < v_hi)) {
    throw ConfigError("scenario.velocity_corridor: lower bound must be below the upper");
  }
  if (v0 < v_lo || v0 > v_hi) {
    throw ConfigError("scenario.v0: start speed must lie inside the velocity corridor");
  }
  if (clearance < 0.0) throw ConfigError("scenario.clearance: must be nonnegative");
  if (front_offset < 0.0) throw ConfigError("scenario.front_offset: must be nonnegative");
  if (n_waypoints < 3) throw ConfigError("scenario.n_waypoints: need at least 3");
  if ((goal - start).norm() < 1e-9) {
    throw ConfigError("scenario.goal: must differ from the start");
  }
  if (terrain.default_r_c < 0.0) {
    throw ConfigError("scenario.terrain.default_r_c: must be nonnegative");
  }
  for (const auto& band : terrain.bands) {
    if (band.r_c < 0.0) throw ConfigError("scenario.terrain.bands: r_c must be nonnegative");
    if (band.x_min > band.x_max) {
      throw ConfigError("scenario.terrain.bands: x_min must not exceed x_max");
    }
  }
  double min_radius = kInf;
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& ob = obstacles[k];
    if (!(ob.radius > 0.0)) {
      throw ConfigError("scenario.obstacles[" + std::to_string(k) +
                        "].radius: must be positive");
    }
    min_radius = std::min(min_radius, ob.radius);
    const double inflated = ob.radius + clearance;
    if ((start - ob.center).norm() <= inflated) {
      throw ConfigError("scenario.start: inside inflated obstacle " + std::to_string(k));
    }
    if ((goal - ob.center).norm() <= inflated) {
      throw ConfigError("scenario.goal: inside inflated obstacle " + std::to_string(k));
    }
  }

  std::vector<std::string> warnings;
  const double spacing = (goal - start).norm() / (n_waypoints - 1);
  if (!obstacles.empty() && spacing > min_radius) {
    warnings.push_back(
        "waypoint spacing " + std::to_string(spacing) + " exceeds the smallest obstacle radius " +
        std::to_string(min_radius) + "; thin obstacles may slip between front points");
  }
  return warnings;
}

std::vector<Obstacle> scatter_obstacles(std::uint64_t seed, int count, double x_min,
                                        double x_max, double y_min, double y_max,
                                        double r_min, double r_max,
                                        const std::vector<Eigen::Vector2d>& keepout,
                                        double margin) {
  RandomStream rng(seed, /*stream=*/7);
  std::vector<Obstacle> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Obstacle ob;
      ob.center = Eigen::Vector2d(rng.uniform(x_min, x_max), rng.uniform(y_min, y_max));
      ob.radius = rng.uniform(r_min, r_max);
      placed = true;
      for (const auto& kp : keepout) {
        if ((kp - ob.center).norm() <= ob.radius + margin) {
          placed = false;
          break;
        }
      }
      if (placed) out.push_back(ob);
    }
    if (!placed) {
      throw ConfigError("scenario.obstacles: could not place obstacle " + std::to_string(i) +
                        " clear of the keepout points");
    }
  }
  return out;
}

std::string WaypointPath::to_json() const {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({p.x(), p.y()});
  j["points"] = std::move(pts);
  j["feasible"] = feasible;
  j["objective"] = objective;
  return j.dump();
}

WaypointPath WaypointPath::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  WaypointPath path;
  for (const auto& row : j.at("points")) {
    path.points.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  }
  path.feasible = j.at("feasible").get<bool>();
  path.objective = j.at("objective").get<double>();
  return path;
}

Eigen::Vector2d front_point(const std::vector<Eigen::Vector2d>& points, int i,
                            double offset) {
  if (i < 0 || i >= static_cast<int>(points.size())) {
    throw DimensionMismatchError("front_point: index out of range");
  }
  if (i == 0) return points[0];
  const Eigen::Vector2d v = points[static_cast<std::size_t>(i)] -
                            points[static_cast<std::size_t>(i - 1)];
  const double len = v.norm();
  if (len < 1e-9) {
    throw DegenerateSegmentError("front_point: consecutive waypoints coincide at index " +
                                 std::to_string(i));
  }
  return points[static_cast<std::size_t>(i)] + offset * (v / len);
}

WaypointPath optimize_path(const Scenario& scenario,
                           std::vector<std::pair<double, double>>* accepted_merit) {
  scenario.validate();
  const int n = scenario.n_waypoints;
  const int free = n - 2;            // interior waypoints
  const int nv = 2 * free;           // optimization variables
  const int nk = static_cast<int>(scenario.obstacles.size());

  std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i)] =
        scenario.start + (scenario.goal - scenario.start) * (static_cast<double>(i) / (n - 1));
  }

  // Hessian of the total squared segment length in the interior variables:
  // the path-graph Laplacian, constant and positive definite.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv);
  for (int i = 0; i < free; ++i) {
    H.block<2, 2>(2 * i, 2 * i) = 4.0 * Eigen::Matrix2d::Identity();
    if (i + 1 < free) {
      H.block<2, 2>(2 * i, 2 * (i + 1)) = -2.0 * Eigen::Matrix2d::Identity();
      H.block<2, 2>(2 * (i + 1), 2 * i) = -2.0 * Eigen::Matrix2d::Identity();
    }
  }

  const auto eval_rows = [&](const std::vector<Eigen::Vector2d>& w)
      -> std::pair<Eigen::VectorXd, Eigen::MatrixXd> {
    // one row per (waypoint i >= 1, obstacle k); start is fixed and validated
    const int rows = (n - 1) * nk;
    Eigen::VectorXd g(rows);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows, nv);
    int row = 0;
    for (int i = 1; i < n; ++i) {
      for (int k = 0; k < nk; ++k, ++row) {
        const ClearanceRow cr = clearance_row(w, i, scenario.front_offset,
                                              scenario.obstacles[static_cast<std::size_t>(k)],
                                              scenario.clearance);
        g(row) = cr.g;
        if (i >= 1 && i <= free) jac.block<1, 2>(row, 2 * (i - 1)) = cr.d_pi.transpose();
        if (i - 1 >= 1 && i - 1 <= free) {
          jac.block<1, 2>(row, 2 * (i - 2)) = cr.d_prev.transpose();
        }
      }
    }
    return {g, jac};
  };
  const auto max_violation = [](const Eigen::VectorXd& g) {
    return g.size() == 0 ? 0.0 : std::max(0.0, -g.minCoeff());
  };

  double rho = 1.0;
  const auto merit = [&](const std::vector<Eigen::Vector2d>& w, const Eigen::VectorXd& g) {
    double pen = 0.0;
    for (int i = 0; i < g.size(); ++i) pen += std::max(0.0, -g(i));
    return path_objective(w) + rho * pen;
  };

  const double base_spacing = (scenario.goal - scenario.start).norm() / (n - 1);
  double tr = std::max(base_spacing, 1e-3);
  bool feasible = false;

  for (int iter = 0; iter < 200; ++iter) {
    const auto [g, jac] = eval_rows(pts);

    Eigen::VectorXd grad(nv);
    for (int i = 1; i <= free; ++i) {
      const Eigen::Vector2d gi = 4.0 * pts[static_cast<std::size_t>(i)] -
                                 2.0 * pts[static_cast<std::size_t>(i - 1)] -
                                 2.0 * pts[static_cast<std::size_t>(i + 1)];
      grad.segment<2>(2 * (i - 1)) = gi;
    }

    // Assemble C'x >= b: linearized clearances plus the trust-region box.
    Eigen::VectorXd d;
    Eigen::VectorXd lam;
    bool solved = false;
    for (int expand = 0; expand < 4; ++expand) {
      const int rows = static_cast<int>(g.size());
      Eigen::MatrixXd C(nv, rows + 2 * nv);
      Eigen::VectorXd b(rows + 2 * nv);
      C.leftCols(rows) = jac.transpose();
      b.head(rows) = -g;
      C.middleCols(rows, nv) = Eigen::MatrixXd::Identity(nv, nv);
      b.segment(rows, nv).setConstant(-tr);
      C.rightCols(nv) = -Eigen::MatrixXd::Identity(nv, nv);
      b.tail(nv).setConstant(-tr);
      auto sol = solve_qp(H, grad, C, b);
      if (sol) {
        d = sol->first;
        lam = sol->second.head(rows);
        solved = true;
        break;
      }
      tr *= 2.0;  // the box was too tight for the linearized clearances
    }
    tr = std::min(tr, 1e3);
    if (!solved) break;

    if (lam.size() > 0) rho = std::max(rho, 2.0 * lam.cwiseAbs().maxCoeff());

    if (d.norm() <= 1e-8) {
      if (max_violation(g) <= 1e-6) {
        feasible = true;
        break;
      }
      rho *= 10.0;
      if (rho > 1e14) break;
      continue;
    }

    std::vector<Eigen::Vector2d> trial = pts;
    for (int i = 1; i <= free; ++i) trial[static_cast<std::size_t>(i)] += d.segment<2>(2 * (i - 1));
    const auto [g_trial, jac_trial] = eval_rows(trial);
    (void)jac_trial;
    const double m_old = merit(pts, g);
    const double m_new = merit(trial, g_trial);
    if (m_new <= m_old - 1e-14 * (1.0 + std::abs(m_old))) {
      if (accepted_merit) accepted_merit->push_back({m_old, m_new});
      pts = std::move(trial);
      tr = std::min(tr * 1.5, 1e3);
    } else {
      tr *= 0.5;
      if (tr < 1e-12) break;
    }
  }

  WaypointPath path;
  path.points = std::move(pts);
  path.objective = path_objective(path.points);
  if (!feasible) {
    // best-effort status: a path can end feasible without hitting the
    // stationarity tolerance inside the iteration cap
    const auto [g, jac] = eval_rows(path.points);
    (void)jac;
    feasible = max_violation(g) <= 1e-6;
  }
  path.feasible = feasible;
  return path;
}

}  // namespace rpc
