#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rpc/types.hpp"

namespace rpc {

/// Kinematic bicycle parameters. The model state uses the canonical
/// partitioned order [theta, v, x, y]: heading and speed are actuated,
/// planar position is not.
struct BicycleParams {
  double l_r = 1.0;       ///< distance from the rear axle to the mass center
  double wheelbase = 2.0; ///< full axle distance, used for the front point
  double mu = 0.9;        ///< tire friction coefficient
  double g = 9.81;        ///< gravity
  double a_max = 3.0;     ///< acceleration that an admissible u1 = 1 commands

  /// @throws ConfigError on nonpositive entries
  void validate() const;
};

/// Rolling-resistance terrain: axis-aligned bands in x with a default
/// coefficient covering gaps. Bands are matched in declaration order and
/// the first match wins, including on shared borders.
struct TerrainBand {
  double x_min = 0.0;
  double x_max = 0.0;
  double r_c = 0.0;
};

struct TerrainMap {
  double default_r_c = 0.0;
  std::vector<TerrainBand> bands;
};

/// Rolling-resistance coefficient at a planar position.
double terrain_rc(const TerrainMap& map, double x, double y);

/// Full bicycle velocity at `state` = [theta, v, x, y] under physical input
/// u = (acceleration, steering angle). Acceleration is capped by mu*g and
/// opposed by rolling resistance r_c*g; |u2| must stay below pi/2.
Eigen::Vector4d bicycle_rhs(const Eigen::Vector4d& state, const Eigen::Vector2d& u,
                            const BicycleParams& params, double r_c);

/// Small-angle reduction of the bicycle used by analysis tests:
/// theta' = (v/l_r) u2, v' = u1, x' = v, y' = v theta.
Eigen::Vector4d reduced_rhs(const Eigen::Vector4d& state, const Eigen::Vector2d& u,
                            const BicycleParams& params);

/// One constant-input piece of a control signal.
struct ControlPiece {
  double duration = 0.0;
  Eigen::VectorXd u;
};

using PiecewiseControl = std::vector<ControlPiece>;

/// Time-stamped simulation record with tagged event markers.
struct TrajectoryLog {
  struct Sample {
    double t = 0.0;
    Eigen::VectorXd state;
    Eigen::VectorXd u;
  };
  struct Event {
    double t = 0.0;
    std::string label;
  };

  int actuated_dim = 0;
  std::vector<Sample> samples;
  std::vector<Event> events;

  void mark(double t, const std::string& label) { events.push_back({t, label}); }

  /// CSV rows `t,theta,v,x,y,u1,u2` at 9 significant digits. Requires the
  /// canonical 4-state, 2-input vehicle layout.
  /// @throws DimensionMismatchError otherwise
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;

  /// Parse a CSV produced by write_csv.
  /// @throws MissingLogError if the file cannot be opened
  static TrajectoryLog read_csv_file(const std::string& path);
};

using VectorField =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& state, const Eigen::VectorXd& u)>;

/// Classic fixed-step fourth-order Runge-Kutta step.
Eigen::VectorXd rk4_step(const VectorField& rhs, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h);

/// Integrate a piecewise-constant control signal with fixed step h, logging
/// every step. The step must tile every piece within 1e-9.
/// @param m  actuated dimension recorded in the log
/// @throws StepMismatchError if h does not tile a piece
TrajectoryLog integrate(const VectorField& rhs, const Eigen::VectorXd& x0, int m,
                        const PiecewiseControl& control, double h, double t0 = 0.0);

/// Monitor polled at every integrator step; a non-empty result is a safety
/// breach reason and halts the plant at that sample.
using SafetyMonitor =
    std::function<std::optional<std::string>(double t, const PartitionedState& state)>;

struct SafetyBreach {
  double t = 0.0;
  std::string reason;
};

/// Single live system that the controller can only move forward in time.
/// Measurements are integrator-exact states.
class Plant {
 public:
  virtual ~Plant() = default;

  virtual int input_dim() const = 0;
  virtual const PartitionedState& state() const = 0;
  virtual double time() const = 0;
  virtual double step() const = 0;  ///< integrator step every apply must tile

  /// Advance under constant input for dt. Returns false when a safety
  /// breach halted the run mid-piece.
  virtual bool apply(const ControlInput& u, double dt) = 0;

  virtual const TrajectoryLog& log() const = 0;
  virtual TrajectoryLog& log() = 0;
  virtual const std::optional<SafetyBreach>& breach() const = 0;
};

/// Bicycle plant. Admissible inputs have |u| <= 1; the first channel is
/// rescaled by a_max into physical acceleration before entering the model.
class BicyclePlant : public Plant {
 public:
  /// @param state0  canonical [theta, v, x, y]
  /// @param h  integrator step; every apply duration must tile by h
  BicyclePlant(const Eigen::Vector4d& state0, BicycleParams params, TerrainMap terrain,
               double h);

  void set_monitor(SafetyMonitor monitor) { monitor_ = std::move(monitor); }

  int input_dim() const override { return 2; }
  const PartitionedState& state() const override { return state_; }
  double time() const override { return t_; }
  double step() const override { return h_; }
  bool apply(const ControlInput& u, double dt) override;
  const TrajectoryLog& log() const override { return log_; }
  TrajectoryLog& log() override { return log_; }
  const std::optional<SafetyBreach>& breach() const override { return breach_; }

  const BicycleParams& params() const { return params_; }
  const TerrainMap& terrain() const { return terrain_; }

 private:
  BicycleParams params_;
  TerrainMap terrain_;
  double h_;
  double t_ = 0.0;
  PartitionedState state_;
  TrajectoryLog log_;
  SafetyMonitor monitor_;
  std::optional<SafetyBreach> breach_;
};

/// Exactly known affine test plant x' = drift + gain * u on the actuated
/// block (no unactuated part). Used by synthesis tests and benchmarks.
class AffinePlant : public Plant {
 public:
  AffinePlant(const Eigen::VectorXd& state0, Eigen::VectorXd drift, Eigen::MatrixXd gain,
              double h);

  int input_dim() const override { return static_cast<int>(gain_.cols()); }
  const PartitionedState& state() const override { return state_; }
  double time() const override { return t_; }
  double step() const override { return h_; }
  bool apply(const ControlInput& u, double dt) override;
  const TrajectoryLog& log() const override { return log_; }
  TrajectoryLog& log() override { return log_; }
  const std::optional<SafetyBreach>& breach() const override { return breach_; }

 private:
  Eigen::VectorXd drift_;
  Eigen::MatrixXd gain_;
  double h_;
  double t_ = 0.0;
  PartitionedState state_;
  TrajectoryLog log_;
  std::optional<SafetyBreach> breach_;
};

}  // namespace rpc
