#include "rpc/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "rpc/errors.hpp"
#include "rpc/linalg.hpp"

namespace rpc {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void SynthConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("synth.dt: must be positive");
  if (!(eps > 0.0) || eps >= 1.0) throw ConfigError("synth.eps: must lie in (0, 1)");
  if (k < 1) throw ConfigError("synth.k: must be at least 1");
  if (m < 1) throw ConfigError("synth.m: must be at least 1");
  if (!(r > 0.0)) throw ConfigError("synth.r: must be positive");
}

double step_radius(const ProxyParams& p, double dt, int k, int m) {
  const double t = static_cast<double>(k) * (m + 1) * dt;
  const double speed = p.drift.norm() + p.b;
  if (p.c <= 0.0) return speed * t;
  return (speed / p.c) * (1.0 - std::exp(-p.c * t));
}

SynthConfig make_synth_config(const LocalModel& model, const LipschitzBounds& bounds,
                              double dt, double eps, int k) {
  SynthConfig cfg;
  cfg.dt = dt;
  cfg.eps = eps;
  cfg.k = k;
  cfg.m = static_cast<int>(model.gain.cols());
  const ProxyParams proxy = ProxyParams::from_model(model);
  cfg.r = step_radius(proxy, dt, k, cfg.m);
  const PerturbationBudget budget =
      perturbation_budget(model, bounds, dt, eps, cfg.m, cfg.r);
  cfg.conv_ok = convergence_condition(budget, proxy, 0.0, cfg.r);
  cfg.validate();
  return cfg;
}

ControlInput initial_control(const LocalModel& model, const Eigen::VectorXd& target,
                             double eps) {
  const Eigen::VectorXd y = target - model.anchor.actuated();
  const double dist = y.norm();
  if (dist < 1e-12) {
    throw ZeroDisplacementError("initial_control: target coincides with the anchor");
  }
  const Eigen::MatrixXd gp = pseudoinverse(model.gain);
  return ControlInput{(1.0 - eps) * (gp * y) / (spectral_norm(gp) * dist)};
}

std::pair<double, Eigen::VectorXd> next_waypoint(double theta_prev,
                                                 const Eigen::VectorXd& frak_x,
                                                 const Eigen::VectorXd& target,
                                                 double r) {
  const double yy = target.squaredNorm();
  if (yy < 1e-24) {
    throw ZeroDisplacementError("next_waypoint: target displacement is zero");
  }
  const double xy = target.dot(frak_x);
  double disc = xy * xy - yy * (frak_x.squaredNorm() - r * r);
  // Absorb rounding at tangency before declaring the tube violated.
  const double scale = xy * xy + yy * (frak_x.squaredNorm() + r * r);
  if (disc < 0.0 && disc > -1e-12 * scale) disc = 0.0;
  if (disc < 0.0) {
    throw NoIntersectionError(
        "next_waypoint: state lies farther than the step radius from the target ray");
  }
  double theta = (xy + std::sqrt(disc)) / yy;
  if (theta <= theta_prev) theta = theta_prev + 1e-9;
  // The ray only extends to the target: once the step circle reaches past
  // it, the waypoint saturates there and stays.
  if (theta > 1.0) theta = 1.0;
  return {theta, theta * target};
}

int argmin_simplex_index(const Eigen::VectorXd& frak_x_next, const Eigen::VectorXd& z_next,
                         const std::vector<Eigen::VectorXd>& actuated_states) {
  if (actuated_states.size() < 2) {
    throw DimensionMismatchError("argmin_simplex_index: need at least two states");
  }
  const Eigen::VectorXd grad = 2.0 * (frak_x_next - z_next);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < actuated_states.size(); ++j) {
    const double val = grad.dot(actuated_states[j + 1] - actuated_states[j]);
    if (val < best_val) {
      best_val = val;
      best = static_cast<int>(j);
    }
  }
  return best;
}

ControlInput argmin_simplex(const Eigen::VectorXd& frak_x_next, const Eigen::VectorXd& z_next,
                            const CycleRecord& cycle, double eps) {
  cycle.validate();
  std::vector<Eigen::VectorXd> states;
  states.reserve(cycle.states.size());
  for (const auto& s : cycle.states) states.push_back(s.actuated());
  const int j = argmin_simplex_index(frak_x_next, z_next, states);
  return ControlInput{(1.0 - eps) * cycle.inputs[static_cast<std::size_t>(j)].u};
}

const char* to_string(SynthTermination t) {
  switch (t) {
    case SynthTermination::Reached: return "Reached";
    case SynthTermination::NoIntersection: return "NoIntersection";
    case SynthTermination::BudgetExceeded: return "BudgetExceeded";
    case SynthTermination::Breached: return "Breached";
  }
  return "Unknown";
}

std::string CycleLogEntry::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["tau_n"] = tau_n;
  j["theta_n"] = theta_n;
  j["z_n"] = vec_json(z_n);
  j["u_base"] = vec_json(u_base);
  j["frak_x"] = vec_json(frak_x);
  j["d_z_before"] = d_z_before;
  j["d_z_after"] = d_z_after;
  j["conv_ok"] = conv_ok;
  return j.dump();
}

SynthResult algorithm1(Plant& plant, const LocalModel& model, const LipschitzBounds& bounds,
                       const Eigen::VectorXd& target, const SynthConfig& cfg) {
  cfg.validate();
  if ((model.anchor.actuated() - plant.state().actuated()).norm() > 1e-6) {
    throw AnchorMismatchError("algorithm1: the model anchor is stale for this plant");
  }

  // All waypoint geometry lives in displacements from the run origin, so the
  // ray z = theta * y is exact for arbitrary anchors.
  const Eigen::VectorXd origin = model.anchor.actuated();
  const Eigen::VectorXd y = target - origin;

  SynthResult result;
  result.model = model;
  result.z = Eigen::VectorXd::Zero(y.size());
  if (y.norm() < 1e-9) {
    result.termination = SynthTermination::Reached;
    return result;
  }

  const double r = cfg.r;
  const int n_max = 10 * static_cast<int>(std::ceil(y.norm() / r));
  ControlInput u_base = initial_control(model, target, cfg.eps);
  LocalModel cur = model;
  double theta = 0.0;
  Eigen::VectorXd z = y;  // cycle 0 descends toward the target itself

  for (int n = 0;; ++n) {
    const Eigen::VectorXd frak_x = plant.state().actuated() - origin;
    const ProxyParams proxy = ProxyParams::from_model(cur);
    const PerturbationBudget budget =
        perturbation_budget(cur, bounds, cfg.dt, cfg.eps, cfg.m, r);

    CycleLogEntry entry;
    entry.n = n;
    entry.tau_n = plant.time();
    entry.theta_n = theta;
    entry.z_n = z;
    entry.u_base = u_base.u;
    entry.frak_x = frak_x;
    entry.d_z_before = (frak_x - z).norm();
    entry.conv_ok = convergence_condition(budget, proxy, frak_x.norm(), r);

    const CycleRecord record = run_cycle(plant, u_base, cfg.eps, cfg.dt);
    const Eigen::VectorXd frak_x_next = plant.state().actuated() - origin;
    entry.d_z_after = (frak_x_next - z).norm();
    result.cycles.push_back(entry);

    if (plant.breach().has_value()) {
      result.termination = SynthTermination::Breached;
      return result;
    }

    cur = identify_local_model(record, bounds);
    result.model = cur;

    double theta_next = 0.0;
    Eigen::VectorXd z_next;
    try {
      std::tie(theta_next, z_next) = next_waypoint(theta, frak_x_next, y, r);
    } catch (const NoIntersectionError&) {
      result.termination = SynthTermination::NoIntersection;
      result.theta = theta;
      return result;
    }
    u_base = argmin_simplex(frak_x_next, z_next, record, cfg.eps);
    theta = theta_next;
    z = z_next;
    result.theta = theta;
    result.z = z;

    if ((z - y).norm() < r && (frak_x_next - y).norm() <= r) {
      result.termination = SynthTermination::Reached;
      return result;
    }
    if (n + 1 >= n_max) {
      result.termination = SynthTermination::BudgetExceeded;
      return result;
    }
  }
}

}  // namespace rpc
