#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpc/types.hpp"

namespace rpc {

/// Parameters of the guaranteed proxy dynamics at an actuated anchor:
///   x' = drift + (b - c |x - anchor|) u,   |u| <= 1,
/// valid on the domain ball |x - anchor| <= b / c. Every consistent system
/// can realize every velocity of this proxy, so its reachable set is a
/// guaranteed underapproximation.
struct ProxyParams {
  Eigen::VectorXd anchor;  ///< actuated anchor the proxy is centered on
  Eigen::VectorXd drift;   ///< actuated drift at the anchor
  double b = 0.0;          ///< guaranteed gain, smallest nonzero singular value
  double c = 0.0;          ///< sum of the Lipschitz bounds

  /// Radius of the validity ball, infinite when c = 0.
  double domain_radius() const;

  /// Gain margin of the drift-free spherical proxy.
  double b_tilde() const { return b - drift.norm(); }

  static ProxyParams from_model(const LocalModel& model);
};

/// Proxy velocity at absolute state x under input u.
/// @throws OutsideDomainError if |x - anchor| exceeds the domain radius
/// @throws DimensionMismatchError on shape mismatch
Eigen::VectorXd proxy_rhs(const ProxyParams& p, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u);

/// Radius of the spherical proxy reachable ball after time t:
///   (b_tilde / c)(1 - exp(-c t)) for c > 0, else b_tilde * t.
/// @throws DriftDominatesError if b_tilde <= 0
double spherical_radius(const ProxyParams& p, double t);

/// Sampled endpoint cloud of a reach-set computation, serializable to JSON
/// as {kind, horizon, center, points, seed}.
struct ReachCloud {
  std::string kind;  ///< "actuated", "unactuated", "union" or "full"
  double horizon = 0.0;
  Eigen::VectorXd center;
  std::vector<Eigen::VectorXd> points;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static ReachCloud from_json(const std::string& text);

  /// Largest distance of any point from the center.
  /// @throws EmptyCloudError when there are no points
  double max_radius() const;
};

/// Monte Carlo underapproximation cloud of the actuated block: endpoints of
/// the proxy dynamics under n_samples piecewise-constant unit-norm inputs
/// over [0, horizon] (10 pieces, directions uniform on the sphere, seeded;
/// every eighth sample holds one constant direction so the boundary of the
/// reachable ball is represented). Deterministic given the seed.
/// @throws DriftDominatesError if a trajectory exits the domain ball
ReachCloud grs_actuated(const ProxyParams& p, double horizon, int n_samples,
                        std::uint64_t seed);

/// Membership of velocity k*d (unit direction d in the image of the local
/// gain) in the guaranteed velocity set at displacement |x - anchor|:
/// |k| <= b - c |x - anchor|.
bool velocity_membership(const ProxyParams& p, const Eigen::VectorXd& x, double k);

/// Scaled variant for an off-center input ball B(a_ball; ball_radius):
/// |k| <= (|a_ball| - ball_radius)(b - c |x - anchor|).
/// @throws InvalidInputBallError if ball_radius > |a_ball|
bool velocity_membership_scaled(const ProxyParams& p, const Eigen::VectorXd& x, double k,
                                double ball_center_norm, double ball_radius);

/// Affine-in-displacement Lipschitz constant of the rank-one factor map
/// F(x) = fbar(x) x~' / |x~|^2 over the input ball B(x~0; ball_radius):
///   [l_f a_min a_max + |fbar0| (1 + 2 a_max)] / a_min^3
///     + l_f (a_min + 2 a_max) / a_min^3 * x_disp,
/// with a_min = |x~0| - ball_radius and a_max = |x~0| + ball_radius.
/// @throws RestViolationError if ball_radius >= |x~0|
double lipschitz_F_bound(double anchor_norm, double ball_radius, double l_f,
                         double unactuated_drift_norm, double x_disp);

/// Time-indexed radius of the actuated input ball used by the unactuated
/// reach set, usually t -> spherical_radius(p, t) or the zero envelope.
using RadiusEnvelope = std::function<double(double)>;

/// Monte Carlo underapproximation cloud of the unactuated block.
///
/// The actuated state is only known to stay in B(x~0; bt(t)); for every
/// sampled boundary value v of that ball the guaranteed unactuated speed is
///   h = (|x~0| - bt(t)) * max(0, sigma_F - L |x - x0|),
/// where sigma_F = |fbar0| / |x~0| is the gain of the rank-one factor map
/// and L is l_f when the Lipschitz-F leading coefficient is at most 1, else
/// the full lipschitz_F_bound. The direction of travel is the drift
/// direction rotated by the angle v makes with x~0 (the cone of the input
/// ball anchored at the drift). Supported for actuated and unactuated
/// dimensions 1 or 2.
/// @throws NearRestError if the actuated anchor norm is (near) zero
/// @throws RestViolationError if bt(horizon) >= |x~0|
ReachCloud grs_unactuated(const LocalModel& model, const LipschitzBounds& bounds,
                          double horizon, const RadiusEnvelope& bt, int n_samples,
                          std::uint64_t seed);

/// Union of the actuated and unactuated clouds lifted to full-state points:
/// actuated points keep the anchor's unactuated block and vice versa.
/// @throws AnchorMismatchError if the clouds were not computed at `anchor`
/// @throws EmptyCloudError if either cloud is empty
ReachCloud grs_full(const PartitionedState& anchor, const ReachCloud& actuated,
                    const ReachCloud& unactuated);

/// Translate a cloud rigidly; kind, horizon and seed are preserved.
/// @throws DimensionMismatchError if delta does not match the center
ReachCloud translate_cloud(const ReachCloud& cloud, const Eigen::VectorXd& delta);

/// Optional overrides for the two budget constants the analysis leaves as
/// modeling choices.
struct BudgetOverrides {
  std::optional<double> l_d;         ///< Lipschitz constant of the descent metric
  std::optional<double> c4_over_c3;  ///< ratio of the two cubic constants
};

/// Perturbation-analysis error budget for one learning cycle. All terms are
/// per-cycle bounds driven by the model magnitude M0 = max over the domain
/// ball of the drift and gain norms and L0 = max(l_f, l_g).
struct PerturbationBudget {
  double dt = 0.0;
  double eps = 0.0;
  int m = 0;

  double m0 = 0.0;
  double l0 = 0.0;
  double c0 = 0.0;  ///< M0 (m+1)
  double c1 = 0.0;  ///< M0 (m+1)^2
  double c2 = 0.0;  ///< 2 M0 L0 (m+1)^2
  double c3 = 0.0;  ///< M0 L0 (m+1)^3

  double e_r = 0.0;       ///< velocity estimation error: C2 dt + eps M0
  double e_n = 0.0;       ///< waypoint tracking error: 2 M0 C1 dt + C1 E_r
  double e_lambda = 0.0;  ///< simplex argument error: 2 ((4 m^{3/2} + eps)/eps) C3 dt
  double e_mu = 0.0;      ///< descent metric error: L_d (3 (C4/C3) E_lambda + C0 dt) / 2

  double domain_radius = 0.0;
  double l_d = 0.0;
  double c4_over_c3 = 1.0;
};

/// Evaluate the budget at (dt, eps) for input dimension m. The step radius
/// enters only the descent-metric Lipschitz constant L_d = 2 (domain + r).
PerturbationBudget perturbation_budget(const LocalModel& model, const LipschitzBounds& bounds,
                                       double dt, double eps, int m,
                                       double step_radius = 0.0,
                                       const BudgetOverrides& overrides = {});

/// Convergence condition of the waypoint-descent analysis at displacement
/// x_disp from the anchor with step radius r:
///   E_n + E_mu <= r (b - c x_disp - |drift| - E_r + eps M0).
bool convergence_condition(const PerturbationBudget& budget, const ProxyParams& p,
                           double x_disp, double r);

}  // namespace rpc
