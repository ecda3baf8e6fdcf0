#include "rpc/learn.hpp"

#include <cmath>
#include <string>

#include "rpc/errors.hpp"
#include "rpc/linalg.hpp"

namespace rpc {

void CycleRecord::validate() const {
  if (states.size() != inputs.size() + 1) {
    throw DimensionMismatchError("CycleRecord: need one more state than inputs");
  }
  if (inputs.empty()) throw DimensionMismatchError("CycleRecord: empty cycle");
  const int p = inputs.front().dim();
  if (static_cast<int>(inputs.size()) != p + 1 || static_cast<int>(signs.size()) != p) {
    throw DimensionMismatchError("CycleRecord: expected p+1 inputs and p signs");
  }
  if (dt <= 0.0 || eps <= 0.0) {
    throw DimensionMismatchError("CycleRecord: dt and eps must be positive");
  }
}

std::pair<std::vector<ControlInput>, std::vector<int>> cycle_inputs(
    const ControlInput& u_base, double eps) {
  if (eps <= 0.0) throw InadmissibleBaseError("cycle_inputs: eps must be positive");
  if (u_base.norm() > 1.0 - eps + 1e-12) {
    throw InadmissibleBaseError(
        "cycle_inputs: base input norm " + std::to_string(u_base.norm()) +
        " leaves no room for perturbation eps=" + std::to_string(eps));
  }
  const int p = u_base.dim();
  std::vector<ControlInput> inputs;
  std::vector<int> signs;
  inputs.reserve(p + 1);
  inputs.push_back(u_base);
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd plus = u_base.u;
    plus[j] += eps;
    int sign = 1;
    // Perturbed pieces keep the same admissibility margin as the base, so
    // every input the learner ever applies stays eps inside the unit ball.
    if (plus.norm() > 1.0 - eps + 1e-12) {
      plus[j] -= 2.0 * eps;
      sign = -1;
    }
    inputs.emplace_back(plus);
    signs.push_back(sign);
  }
  return {inputs, signs};
}

CycleRecord run_cycle(Plant& plant, const ControlInput& u_base, double eps, double dt) {
  auto [inputs, signs] = cycle_inputs(u_base, eps);
  CycleRecord record;
  record.inputs = inputs;
  record.signs = signs;
  record.dt = dt;
  record.eps = eps;
  record.t0 = plant.time();
  record.states.push_back(plant.state());
  for (const auto& u : inputs) {
    const bool ok = plant.apply(u, dt);
    record.states.push_back(plant.state());
    if (!ok) break;
  }
  return record;
}

std::vector<Eigen::VectorXd> estimate_velocities(const CycleRecord& record) {
  record.validate();
  std::vector<Eigen::VectorXd> velocities;
  velocities.reserve(record.inputs.size());
  for (std::size_t j = 0; j < record.inputs.size(); ++j) {
    velocities.push_back(
        (record.states[j + 1].actuated() - record.states[j].actuated()) / record.dt);
  }
  return velocities;
}

LocalModel identify_local_model(const CycleRecord& record, const LipschitzBounds& bounds) {
  record.validate();
  const auto velocities = estimate_velocities(record);
  const int p = record.inputs.front().dim();
  const int m = record.states.front().actuated_dim();

  // The perturbation directions are the coordinate axes with nonzero signs;
  // a zero sign cannot occur from cycle_inputs, but a hand-built record may
  // be degenerate.
  for (int j = 0; j < p; ++j) {
    if (record.signs[j] != 1 && record.signs[j] != -1) {
      throw SingularExcitationError("identify_local_model: perturbations must span the axes");
    }
  }

  Eigen::MatrixXd gain(m, p);
  for (int j = 0; j < p; ++j) {
    gain.col(j) = (velocities[j + 1] - velocities[0]) / (record.signs[j] * record.eps);
  }
  const Eigen::VectorXd drift = velocities[0] - gain * record.inputs[0].u;

  const PartitionedState& anchor = record.states.back();
  Eigen::VectorXd unactuated_drift =
      (record.states[1].unactuated() - record.states[0].unactuated()) / record.dt;

  LocalModel model = make_local_model(anchor, drift, gain, unactuated_drift, bounds);
  if (model.b <= model.c * bounds.neighborhood_radius) {
    throw DegenerateGainError(
        "identify_local_model: gain " + std::to_string(model.b) +
        " is at most c * neighborhood_radius = " +
        std::to_string(model.c * bounds.neighborhood_radius));
  }
  return model;
}

}  // namespace rpc
