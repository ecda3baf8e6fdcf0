#include "rpc/reach.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "rpc/errors.hpp"
#include "rpc/linalg.hpp"
#include "rpc/rng.hpp"

namespace rpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPieces = 10;         // constant-input pieces per horizon
constexpr int kConstantStride = 8;  // every eighth sample holds one direction
constexpr double kMaxStep = 1e-3;   // upper bound on the internal RK4 step

/// RK4 for a time-dependent field, used by the sampled reach integrations.
template <typename F>
Eigen::VectorXd rk4_time_step(const F& f, double t, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = f(t, x);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

int substeps(double piece) {
  return std::max(1, static_cast<int>(std::ceil(piece / kMaxStep - 1e-12)));
}

}  // namespace

double ProxyParams::domain_radius() const { return c > 0.0 ? b / c : kInf; }

ProxyParams ProxyParams::from_model(const LocalModel& model) {
  ProxyParams p;
  p.anchor = model.anchor.actuated();
  p.drift = model.drift;
  p.b = model.b;
  p.c = model.c;
  return p;
}

Eigen::VectorXd proxy_rhs(const ProxyParams& p, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u) {
  if (x.size() != p.anchor.size() || u.size() != p.anchor.size()) {
    throw DimensionMismatchError("proxy_rhs: state/input must match the anchor dimension");
  }
  const double r = (x - p.anchor).norm();
  if (r > p.domain_radius() + 1e-9) {
    throw OutsideDomainError("proxy_rhs: state at displacement " + std::to_string(r) +
                             " is outside the domain ball of radius " +
                             std::to_string(p.domain_radius()));
  }
  return p.drift + (p.b - p.c * r) * u;
}

double spherical_radius(const ProxyParams& p, double t) {
  const double bt = p.b_tilde();
  if (bt <= 0.0) {
    throw DriftDominatesError("spherical_radius: b_tilde = " + std::to_string(bt) +
                              " <= 0, drift dominates the guaranteed gain");
  }
  if (p.c <= 0.0) return bt * t;
  return (bt / p.c) * (1.0 - std::exp(-p.c * t));
}

std::string ReachCloud::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["horizon"] = horizon;
  j["center"] = std::vector<double>(center.data(), center.data() + center.size());
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  }
  j["points"] = std::move(pts);
  j["seed"] = seed;
  return j.dump();
}

ReachCloud ReachCloud::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ReachCloud cloud;
  cloud.kind = j.at("kind").get<std::string>();
  cloud.horizon = j.at("horizon").get<double>();
  const auto c = j.at("center").get<std::vector<double>>();
  cloud.center = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  for (const auto& row : j.at("points")) {
    const auto v = row.get<std::vector<double>>();
    cloud.points.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  }
  cloud.seed = j.at("seed").get<std::uint64_t>();
  return cloud;
}

double ReachCloud::max_radius() const {
  if (points.empty()) throw EmptyCloudError("ReachCloud: no points");
  double r = 0.0;
  for (const auto& p : points) r = std::max(r, (p - center).norm());
  return r;
}

ReachCloud grs_actuated(const ProxyParams& p, double horizon, int n_samples,
                        std::uint64_t seed) {
  const int m = static_cast<int>(p.anchor.size());
  const double piece = horizon / kPieces;
  const int nsub = substeps(piece);
  const double h = piece / nsub;
  const double dom = p.domain_radius();

  ReachCloud cloud;
  cloud.kind = "actuated";
  cloud.horizon = horizon;
  cloud.center = p.anchor;
  cloud.seed = seed;
  cloud.points.reserve(n_samples);

  RandomStream root(seed, /*stream=*/1);
  for (int i = 0; i < n_samples; ++i) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(i));
    const bool constant = (i % kConstantStride) == 0;
    Eigen::VectorXd dir = rng.unit_vector(m);
    // Displacement coordinates keep translated anchors bit-comparable.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < kPieces; ++k) {
      if (k > 0 && !constant) dir = rng.unit_vector(m);
      const auto f = [&](double, const Eigen::VectorXd& dd) -> Eigen::VectorXd {
        return p.drift + (p.b - p.c * dd.norm()) * dir;
      };
      for (int s = 0; s < nsub; ++s) {
        d = rk4_time_step(f, 0.0, d, h);
        if (d.norm() > dom + 1e-9) {
          throw DriftDominatesError(
              "grs_actuated: sampled trajectory left the domain ball at displacement " +
              std::to_string(d.norm()));
        }
      }
    }
    cloud.points.push_back(p.anchor + d);
  }
  return cloud;
}

bool velocity_membership(const ProxyParams& p, const Eigen::VectorXd& x, double k) {
  const double r = (x - p.anchor).norm();
  return std::abs(k) <= p.b - p.c * r;
}

bool velocity_membership_scaled(const ProxyParams& p, const Eigen::VectorXd& x, double k,
                                double ball_center_norm, double ball_radius) {
  if (ball_radius > ball_center_norm) {
    throw InvalidInputBallError("velocity_membership_scaled: input ball radius " +
                                std::to_string(ball_radius) + " exceeds its center norm " +
                                std::to_string(ball_center_norm));
  }
  const double scale = ball_center_norm - ball_radius;
  const double r = (x - p.anchor).norm();
  return std::abs(k) <= scale * (p.b - p.c * r);
}

double lipschitz_F_bound(double anchor_norm, double ball_radius, double l_f,
                         double unactuated_drift_norm, double x_disp) {
  const double a_min = anchor_norm - ball_radius;
  const double a_max = anchor_norm + ball_radius;
  if (a_min <= 0.0) {
    throw RestViolationError("lipschitz_F_bound: input ball of radius " +
                             std::to_string(ball_radius) + " reaches rest from anchor norm " +
                             std::to_string(anchor_norm));
  }
  const double denom = a_min * a_min * a_min;
  const double constant =
      (l_f * a_min * a_max + unactuated_drift_norm * (1.0 + 2.0 * a_max)) / denom;
  const double slope = l_f * (a_min + 2.0 * a_max) / denom;
  return constant + slope * x_disp;
}

namespace {

/// Rotate the unit drift direction by the angle that the sampled input-ball
/// point makes with the actuated anchor. Defined for dimensions 1 and 2.
Eigen::VectorXd cone_direction(const Eigen::VectorXd& anchor, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& drift_dir) {
  if (anchor.size() == 1) {
    const double sign = (v[0] * anchor[0] >= 0.0) ? 1.0 : -1.0;
    return sign * drift_dir;
  }
  const Eigen::Vector2d a = anchor.head<2>().normalized();
  const Eigen::Vector2d w = v.head<2>().normalized();
  const double cross = a.x() * w.y() - a.y() * w.x();
  const double dot = a.dot(w);
  const double phi = std::atan2(cross, dot);
  const double cp = std::cos(phi), sp = std::sin(phi);
  Eigen::Vector2d f(drift_dir[0], drift_dir[1]);
  return Eigen::Vector2d(cp * f.x() - sp * f.y(), sp * f.x() + cp * f.y());
}

}  // namespace

ReachCloud grs_unactuated(const LocalModel& model, const LipschitzBounds& bounds,
                          double horizon, const RadiusEnvelope& bt, int n_samples,
                          std::uint64_t seed) {
  const Eigen::VectorXd x_act = model.anchor.actuated();
  const Eigen::VectorXd x_un = model.anchor.unactuated();
  const int m = static_cast<int>(x_act.size());
  const int q = static_cast<int>(x_un.size());
  if (!((m == 1 && q == 1) || (m == 2 && q == 2))) {
    throw DimensionMismatchError(
        "grs_unactuated: supported for actuated/unactuated dimensions 1 or 2");
  }
  const double anchor_norm = x_act.norm();
  if (anchor_norm < 1e-9) {
    throw NearRestError("grs_unactuated: actuated anchor is at rest");
  }
  const double bt_end = bt(horizon);
  if (bt_end >= anchor_norm - 1e-12) {
    throw RestViolationError("grs_unactuated: input ball radius " + std::to_string(bt_end) +
                             " reaches rest from anchor norm " + std::to_string(anchor_norm));
  }

  ReachCloud cloud;
  cloud.kind = "unactuated";
  cloud.horizon = horizon;
  cloud.center = x_un;
  cloud.seed = seed;
  cloud.points.reserve(n_samples);

  const double fbar_norm = model.unactuated_drift.norm();
  const double sigma_f = fbar_norm / anchor_norm;
  if (sigma_f < 1e-15) {
    // No guaranteed motion; the cloud degenerates to the anchor.
    for (int i = 0; i < n_samples; ++i) cloud.points.push_back(x_un);
    return cloud;
  }
  const Eigen::VectorXd drift_dir = model.unactuated_drift / fbar_norm;

  // Lipschitz constant for the factor map: the plain drift bound suffices
  // when the leading coefficient is at most one, else the full affine bound.
  const double leading = lipschitz_F_bound(anchor_norm, bt_end, bounds.l_f, fbar_norm, 0.0);
  const bool use_affine = leading > 1.0;

  const double piece = horizon / kPieces;
  const int nsub = substeps(piece);
  const double h = piece / nsub;

  RandomStream root(seed, /*stream=*/2);
  for (int i = 0; i < n_samples; ++i) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(i));
    const bool constant = (i % kConstantStride) == 0;
    Eigen::VectorXd ball_dir = rng.unit_vector(m);
    Eigen::VectorXd xb = x_un;
    double t = 0.0;
    for (int k = 0; k < kPieces; ++k) {
      if (k > 0 && !constant) ball_dir = rng.unit_vector(m);
      const auto f = [&](double tt, const Eigen::VectorXd& xx) -> Eigen::VectorXd {
        const double radius = bt(tt);
        const Eigen::VectorXd v = x_act + radius * ball_dir;
        const double disp =
            std::sqrt(radius * radius + (xx - x_un).squaredNorm());
        const double lip = use_affine
                               ? lipschitz_F_bound(anchor_norm, bt_end, bounds.l_f,
                                                   fbar_norm, disp)
                               : bounds.l_f;
        const double gain =
            (anchor_norm - radius) * std::max(0.0, sigma_f - lip * disp);
        return gain * cone_direction(x_act, v, drift_dir);
      };
      for (int s = 0; s < nsub; ++s) {
        xb = rk4_time_step(f, t, xb, h);
        t += h;
      }
    }
    cloud.points.push_back(xb);
  }
  return cloud;
}

ReachCloud grs_full(const PartitionedState& anchor, const ReachCloud& actuated,
                    const ReachCloud& unactuated) {
  if (actuated.points.empty() || unactuated.points.empty()) {
    throw EmptyCloudError("grs_full: both clouds must be nonempty");
  }
  const Eigen::VectorXd a_act = anchor.actuated();
  const Eigen::VectorXd a_un = anchor.unactuated();
  if (actuated.center.size() != a_act.size() ||
      (actuated.center - a_act).norm() > 1e-9 ||
      unactuated.center.size() != a_un.size() ||
      (unactuated.center - a_un).norm() > 1e-9) {
    throw AnchorMismatchError("grs_full: clouds were not computed at the given anchor");
  }
  ReachCloud cloud;
  cloud.kind = "full";
  cloud.horizon = actuated.horizon;
  cloud.center = anchor.full();
  cloud.seed = actuated.seed;
  cloud.points.reserve(actuated.points.size() + unactuated.points.size());
  const int n = static_cast<int>(anchor.full().size());
  for (const auto& p : actuated.points) {
    Eigen::VectorXd full(n);
    full.head(a_act.size()) = p;
    full.tail(a_un.size()) = a_un;
    cloud.points.push_back(std::move(full));
  }
  for (const auto& p : unactuated.points) {
    Eigen::VectorXd full(n);
    full.head(a_act.size()) = a_act;
    full.tail(a_un.size()) = p;
    cloud.points.push_back(std::move(full));
  }
  return cloud;
}

ReachCloud translate_cloud(const ReachCloud& cloud, const Eigen::VectorXd& delta) {
  if (delta.size() != cloud.center.size()) {
    throw DimensionMismatchError("translate_cloud: delta dimension mismatch");
  }
  ReachCloud out = cloud;
  out.center += delta;
  for (auto& p : out.points) p += delta;
  return out;
}

PerturbationBudget perturbation_budget(const LocalModel& model, const LipschitzBounds& bounds,
                                       double dt, double eps, int m, double step_radius,
                                       const BudgetOverrides& overrides) {
  PerturbationBudget budget;
  budget.dt = dt;
  budget.eps = eps;
  budget.m = m;
  budget.l0 = std::max(bounds.l_f, bounds.l_g);

  const double dom = model.c > 0.0 ? model.b / model.c : kInf;
  budget.domain_radius = dom;
  const double drift_sup =
      bounds.l_f > 0.0 ? model.drift.norm() + bounds.l_f * dom : model.drift.norm();
  const double gain_sup = bounds.l_g > 0.0 ? spectral_norm(model.gain) + bounds.l_g * dom
                                           : spectral_norm(model.gain);
  budget.m0 = std::max(drift_sup, gain_sup);

  const double mp1 = static_cast<double>(m + 1);
  budget.c0 = budget.m0 * mp1;
  budget.c1 = budget.m0 * mp1 * mp1;
  budget.c2 = 2.0 * budget.m0 * budget.l0 * mp1 * mp1;
  budget.c3 = budget.m0 * budget.l0 * mp1 * mp1 * mp1;

  budget.e_r = budget.c2 * dt + eps * budget.m0;
  budget.e_n = 2.0 * budget.m0 * budget.c1 * dt + budget.c1 * budget.e_r;
  budget.e_lambda =
      2.0 * ((4.0 * std::pow(static_cast<double>(m), 1.5) + eps) / eps) * budget.c3 * dt;

  budget.l_d = overrides.l_d.value_or(2.0 * (dom + step_radius));
  budget.c4_over_c3 = overrides.c4_over_c3.value_or(1.0);
  budget.e_mu =
      (3.0 * budget.l_d * budget.c4_over_c3 * budget.e_lambda + budget.l_d * budget.c0 * dt) /
      2.0;
  return budget;
}

bool convergence_condition(const PerturbationBudget& budget, const ProxyParams& p,
                           double x_disp, double r) {
  const double lhs = budget.e_n + budget.e_mu;
  const double rhs =
      r * (p.b - p.c * x_disp - p.drift.norm() - budget.e_r + budget.eps * budget.m0);
  return lhs <= rhs;
}

}  // namespace rpc
