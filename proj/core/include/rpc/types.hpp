#pragma once

#include <Eigen/Core>

namespace rpc {

/// State of a control-affine system split into an actuated block (first m
/// entries, directly driven through the input gain) and an unactuated block
/// (remaining entries, driven only through the actuated block).
///
/// The vehicle uses the canonical partitioned order [theta, v, x, y]; the
/// plant maps to and from its own state order at the boundary.
class PartitionedState {
 public:
  PartitionedState() : m_(0) {}

  /// @param full  full state vector
  /// @param m  actuated dimension; 1 <= m <= full.size()
  /// @throws DimensionMismatchError on an invalid split
  PartitionedState(Eigen::VectorXd full, int m);

  const Eigen::VectorXd& full() const { return full_; }
  int actuated_dim() const { return m_; }
  int unactuated_dim() const { return static_cast<int>(full_.size()) - m_; }

  Eigen::VectorXd actuated() const { return full_.head(m_); }
  Eigen::VectorXd unactuated() const { return full_.tail(unactuated_dim()); }

  void set_actuated(const Eigen::VectorXd& a) { full_.head(m_) = a; }
  void set_unactuated(const Eigen::VectorXd& u) { full_.tail(unactuated_dim()) = u; }

 private:
  Eigen::VectorXd full_;
  int m_;
};

/// Split a raw vector into a PartitionedState with actuated dimension m.
/// @throws DimensionMismatchError if m < 1 or m > x.size()
PartitionedState partition(const Eigen::VectorXd& x, int m);

/// Known Lipschitz bounds of the unknown dynamics over a neighborhood of
/// the current anchor, the only prior information the controller holds.
struct LipschitzBounds {
  double l_f = 0.0;                 ///< bound on the drift variation
  double l_g = 0.0;                 ///< bound on the gain variation
  double neighborhood_radius = 0.0; ///< radius over which the bounds hold

  /// @throws ConfigError on negative entries
  void validate() const;
};

/// Control input; admissible inputs live in the closed unit ball. The type
/// itself does not clamp, because the plant boundary rescales the first
/// channel to physical acceleration; admissibility is asserted wherever the
/// controller emits inputs.
struct ControlInput {
  Eigen::VectorXd u;

  ControlInput() = default;
  explicit ControlInput(Eigen::VectorXd v) : u(std::move(v)) {}
  static ControlInput zero(int dim) { return ControlInput(Eigen::VectorXd::Zero(dim)); }

  int dim() const { return static_cast<int>(u.size()); }
  double norm() const { return u.norm(); }
  bool admissible(double tol = 1e-9) const { return u.norm() <= 1.0 + tol; }
};

/// Local model of the unknown dynamics at an anchor state: the value of the
/// actuated drift and gain, the resulting guaranteed proxy parameters, and
/// the unactuated drift used for the position-block reach set.
struct LocalModel {
  PartitionedState anchor;          ///< state the values were measured at
  Eigen::VectorXd drift;            ///< actuated drift at the anchor
  Eigen::MatrixXd gain;             ///< actuated input gain at the anchor
  Eigen::VectorXd unactuated_drift; ///< unactuated velocity at the anchor

  double b = 0.0;       ///< smallest nonzero singular value of gain
  double c = 0.0;       ///< l_f + l_g
  double b_tilde = 0.0; ///< b - |drift|, gain margin of the spherical proxy
};

/// Assemble a LocalModel, deriving (b, c, b_tilde) from the measured values
/// and the Lipschitz bounds.
/// @throws ZeroMatrixError if the gain is identically zero
/// @throws DimensionMismatchError if shapes disagree with the anchor split
LocalModel make_local_model(const PartitionedState& anchor,
                            const Eigen::VectorXd& drift,
                            const Eigen::MatrixXd& gain,
                            const Eigen::VectorXd& unactuated_drift,
                            const LipschitzBounds& bounds);

}  // namespace rpc
