#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rpc/learn.hpp"
#include "rpc/plant.hpp"
#include "rpc/reach.hpp"
#include "rpc/types.hpp"

namespace rpc {

/// Inner-loop synthesis parameters. `r` is the step radius between
/// consecutive waypoints, the worst-case proxy displacement over one
/// waypoint period of k learning cycles. `conv_ok` records whether the
/// perturbation-budget convergence condition held at the anchor the config
/// was made for; a false value is a warning, not an error — the loop still
/// descends empirically on well-actuated systems.
struct SynthConfig {
  double dt = 0.0;  ///< piece duration
  double eps = 0.0; ///< perturbation magnitude and admissibility margin
  int k = 1;        ///< waypoint horizon multiplier
  int m = 0;        ///< input dimension
  double r = 0.0;   ///< waypoint step radius
  bool conv_ok = true;

  /// @throws ConfigError on out-of-range fields
  void validate() const;
};

/// Worst-case displacement of the proxy over one waypoint period
/// t = k(m+1)dt: the supremum of the radial growth ode r' = |a| + b - c r
/// from zero (drift aligned with the input),
///   ((|a| + b)/c)(1 - exp(-c t)) for c > 0, else (|a| + b) t.
double step_radius(const ProxyParams& p, double dt, int k, int m);

/// Build a SynthConfig at a model anchor: computes the step radius from the
/// model's proxy and evaluates the convergence condition there (stored in
/// conv_ok; never throws for a failed condition).
SynthConfig make_synth_config(const LocalModel& model, const LipschitzBounds& bounds,
                              double dt, double eps, int k);

/// Pseudoinverse steering toward the target:
///   u = (1 - eps) G^+ (target - anchor) / (|G^+| |target - anchor|),
/// admissible by construction.
/// @throws ZeroDisplacementError if the target coincides with the anchor
ControlInput initial_control(const LocalModel& model, const Eigen::VectorXd& target,
                             double eps);

/// Advance the waypoint parameter: the larger root of |theta y - x|^2 = r^2
/// for the displacement-coordinate target y and cycle-end state x, clamped
/// below by theta_prev + 1e-9 so the parameter never regresses and above by
/// 1 so the waypoint saturates at the target instead of overshooting it.
/// @throws NoIntersectionError if the sphere of radius r around x misses the
///         target ray (tracking tube violated)
/// @throws ZeroDisplacementError if y is (near) zero
std::pair<double, Eigen::VectorXd> next_waypoint(double theta_prev,
                                                 const Eigen::VectorXd& frak_x,
                                                 const Eigen::VectorXd& target,
                                                 double r);

/// Index of the cycle piece whose state increment best descends toward the
/// next waypoint: argmin_j <2(x - z), s_{j+1} - s_j>, ties to the lowest j.
/// The simplex-constrained argmin over convex input combinations is linear
/// in the weights, so a vertex attains it.
int argmin_simplex_index(const Eigen::VectorXd& frak_x_next, const Eigen::VectorXd& z_next,
                         const std::vector<Eigen::VectorXd>& actuated_states);

/// Next base input (1 - eps) u_{j*} from the argmin piece of the cycle.
ControlInput argmin_simplex(const Eigen::VectorXd& frak_x_next, const Eigen::VectorXd& z_next,
                            const CycleRecord& cycle, double eps);

enum class SynthTermination {
  Reached,         ///< final waypoint within r of the target
  NoIntersection,  ///< tracking tube violated, waypoint update infeasible
  BudgetExceeded,  ///< cycle cap hit without reaching the target
  Breached,        ///< the plant's safety monitor halted the run mid-cycle
};

const char* to_string(SynthTermination t);

/// One line of the per-cycle synthesis log. Vector quantities are in
/// displacement coordinates from the run origin.
struct CycleLogEntry {
  int n = 0;
  double tau_n = 0.0;
  double theta_n = 0.0;
  Eigen::VectorXd z_n;      ///< waypoint the cycle descended toward
  Eigen::VectorXd u_base;   ///< base input of the cycle
  Eigen::VectorXd frak_x;   ///< cycle start state
  double d_z_before = 0.0;  ///< |frak_x - z_n| at cycle start
  double d_z_after = 0.0;   ///< |frak_x' - z_n| at cycle end
  bool conv_ok = false;     ///< convergence condition at cycle start

  std::string to_json() const;
};

struct SynthResult {
  SynthTermination termination = SynthTermination::Reached;
  std::vector<CycleLogEntry> cycles;
  LocalModel model;       ///< model identified on the last completed cycle
  double theta = 0.0;     ///< final waypoint parameter
  Eigen::VectorXd z;      ///< final waypoint, displacement coordinates
};

/// Track a straight reachable path from the model anchor to `target`
/// (absolute actuated coordinates) by learning cycles and waypoint descent.
///
/// Repeats cycles of m+1 pieces: apply the perturbed inputs of the base,
/// re-identify the local model from the record, advance the waypoint by the
/// step radius along the target ray, and pick the next base input by the
/// simplex argmin. Terminates Reached once the waypoint is within r of the
/// target (at least one cycle runs unless the target is already within
/// 1e-9 of the anchor), BudgetExceeded after 10 ceil(|target - anchor|/r)
/// cycles. The trajectory accumulates on the plant's own log.
///
/// @param model  fresh local model anchored at the plant's current state
/// @throws AnchorMismatchError if the model anchor is stale (> 1e-6 away)
/// @throws InadmissibleBaseError, DegenerateGainError from the cycles
SynthResult algorithm1(Plant& plant, const LocalModel& model, const LipschitzBounds& bounds,
                       const Eigen::VectorXd& target, const SynthConfig& cfg);

}  // namespace rpc
