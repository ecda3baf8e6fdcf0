#pragma once

#include <vector>

#include <Eigen/Core>

#include "rpc/plant.hpp"
#include "rpc/types.hpp"

namespace rpc {

/// One learning cycle: p+1 constant input pieces of equal duration, where p
/// is the input dimension. Piece 0 applies the base input; piece j applies
/// the base plus a single-axis perturbation of magnitude eps.
struct CycleRecord {
  std::vector<ControlInput> inputs;      ///< p+1 inputs, base first
  std::vector<PartitionedState> states;  ///< p+2 states at piece boundaries
  std::vector<int> signs;                ///< perturbation sign per axis, size p
  double dt = 0.0;                       ///< duration of each piece
  double eps = 0.0;                      ///< perturbation magnitude
  double t0 = 0.0;                       ///< plant time at cycle start

  /// @throws DimensionMismatchError if the state/input counts disagree
  void validate() const;
};

/// Build the p+1 cycle inputs for a base input: the base itself, then the
/// base perturbed by +eps along each axis (sign flipped to -eps only if the
/// positive direction would leave the margin ball of radius 1 - eps the
/// base itself is held to).
///
/// @throws InadmissibleBaseError if |u_base| > 1 - eps (no perturbation room)
/// @returns inputs and the chosen sign per axis
std::pair<std::vector<ControlInput>, std::vector<int>> cycle_inputs(
    const ControlInput& u_base, double eps);

/// Drive the plant through one learning cycle and record the boundary states.
/// Fails (partial record, plant breached) only if a safety monitor halts.
CycleRecord run_cycle(Plant& plant, const ControlInput& u_base, double eps, double dt);

/// Finite-difference velocity of the actuated block over each piece:
/// v_j = (x~_{j+1} - x~_j) / dt.
std::vector<Eigen::VectorXd> estimate_velocities(const CycleRecord& record);

/// Identify the local actuated model from one cycle.
///
/// Columns of the gain come from the perturbed pieces,
///   G e_j = (v_j - v_0) / (s_j eps),
/// the drift from extrapolating piece 0 to zero input, f = v_0 - G u_0.
/// The anchor is the final cycle state; the unactuated drift is the finite
/// difference of the unactuated block over piece 0.
///
/// @throws SingularExcitationError if the perturbation directions are rank
///         deficient
/// @throws DegenerateGainError if the identified gain b is at most
///         c * neighborhood_radius (no guaranteed motion over the
///         neighborhood the bounds are valid on)
LocalModel identify_local_model(const CycleRecord& record, const LipschitzBounds& bounds);

}  // namespace rpc
