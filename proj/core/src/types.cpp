#include "rpc/types.hpp"

#include <string>

#include "rpc/errors.hpp"
#include "rpc/linalg.hpp"

namespace rpc {

PartitionedState::PartitionedState(Eigen::VectorXd full, int m)
    : full_(std::move(full)), m_(m) {
  if (m_ < 1 || m_ > full_.size()) {
    throw DimensionMismatchError(
        "PartitionedState: actuated dimension " + std::to_string(m_) +
        " invalid for state of size " + std::to_string(full_.size()));
  }
}

PartitionedState partition(const Eigen::VectorXd& x, int m) {
  return PartitionedState(x, m);
}

void LipschitzBounds::validate() const {
  if (l_f < 0.0) throw ConfigError("lipschitz.l_f: must be nonnegative");
  if (l_g < 0.0) throw ConfigError("lipschitz.l_g: must be nonnegative");
  if (neighborhood_radius < 0.0) {
    throw ConfigError("lipschitz.neighborhood_radius: must be nonnegative");
  }
}

LocalModel make_local_model(const PartitionedState& anchor,
                            const Eigen::VectorXd& drift,
                            const Eigen::MatrixXd& gain,
                            const Eigen::VectorXd& unactuated_drift,
                            const LipschitzBounds& bounds) {
  bounds.validate();
  const int m = anchor.actuated_dim();
  if (drift.size() != m || gain.rows() != m) {
    throw DimensionMismatchError("make_local_model: drift/gain rows must match actuated dim");
  }
  if (unactuated_drift.size() != anchor.unactuated_dim()) {
    throw DimensionMismatchError("make_local_model: unactuated drift size mismatch");
  }
  LocalModel model;
  model.anchor = anchor;
  model.drift = drift;
  model.gain = gain;
  model.unactuated_drift = unactuated_drift;
  model.b = pinv_norm_inverse(gain);
  model.c = bounds.l_f + bounds.l_g;
  model.b_tilde = model.b - drift.norm();
  return model;
}

}  // namespace rpc
