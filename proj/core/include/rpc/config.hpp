#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpc/control_loop.hpp"
#include "rpc/planner.hpp"
#include "rpc/plant.hpp"
#include "rpc/types.hpp"

namespace rpc {

/// Complete description of one simulator run, read from a YAML file. All
/// randomness in the run flows from the single seed.
struct RunConfig {
  Scenario scenario;
  double dt = 0.015;
  double eps = 0.1;
  int k = 5;
  double horizon = 0.1;
  int n_tilde = 5;
  LipschitzBounds lipschitz;
  BicycleParams plant;
  double plant_step = 1e-3;  ///< integrator step; must tile dt
  int cloud_samples = 512;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Field-range validation across all sections. Hard violations throw
  /// ConfigError naming the offending key; soft issues return as warnings.
  std::vector<std::string> validate() const;

  /// The RpcConfig slice consumed by the outer loop.
  RpcConfig rpc_config() const;
};

/// Parse a YAML config file. RPC_OUTPUT_DIR and RPC_SEED environment
/// variables, when set, override the corresponding file values. A
/// `scenario.random_obstacles` section is materialized into explicit
/// obstacles (seeded by the run seed) at parse time.
/// @throws ConfigError naming the offending key or file
RunConfig parse_run_config(const std::string& path);

/// Parse config text directly; environment overrides apply only on request.
RunConfig parse_run_config_text(const std::string& text, bool apply_env = false);

/// Serialize back to YAML. parse(serialize(c)) reproduces c field by field.
std::string serialize_run_config(const RunConfig& config);

}  // namespace rpc
