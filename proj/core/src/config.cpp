#include "rpc/config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <type_traits>

#include <yaml-cpp/yaml.h>

#include "rpc/errors.hpp"

namespace rpc {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsDefined() || node.IsNull()) fail(key, "required");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    if constexpr (std::is_same_v<T, std::string>) {
      fail(key, "cannot be parsed as a string");
    } else {
      fail(key, "cannot be parsed as a number");
    }
  }
}

template <typename T>
T scalar_or(const YAML::Node& node, const std::string& key, T fallback) {
  if (!node.IsDefined() || node.IsNull()) return fallback;
  return scalar<T>(node, key);
}

Eigen::Vector2d vec2(const YAML::Node& node, const std::string& key) {
  if (!node.IsDefined() || !node.IsSequence() || node.size() != 2)
    fail(key, "must be a sequence of two numbers");
  return {scalar<double>(node[0], key + "[0]"), scalar<double>(node[1], key + "[1]")};
}

TerrainMap parse_terrain(const YAML::Node& node) {
  TerrainMap map;
  if (!node.IsDefined()) return map;
  map.default_r_c = scalar_or<double>(node["default_r_c"], "scenario.terrain.default_r_c", 0.0);
  const YAML::Node bands = node["bands"];
  if (bands.IsDefined()) {
    if (!bands.IsSequence()) fail("scenario.terrain.bands", "must be a sequence");
    for (std::size_t i = 0; i < bands.size(); ++i) {
      const std::string key = "scenario.terrain.bands[" + std::to_string(i) + "]";
      TerrainBand band;
      band.x_min = scalar<double>(bands[i]["x_min"], key + ".x_min");
      band.x_max = scalar<double>(bands[i]["x_max"], key + ".x_max");
      band.r_c = scalar<double>(bands[i]["r_c"], key + ".r_c");
      map.bands.push_back(band);
    }
  }
  return map;
}

Scenario parse_scenario(const YAML::Node& node, std::uint64_t seed, double default_front) {
  if (!node.IsDefined() || !node.IsMap()) fail("scenario", "required section is missing");
  Scenario s;
  s.start = vec2(node["start"], "scenario.start");
  s.goal = vec2(node["goal"], "scenario.goal");
  s.v0 = scalar_or<double>(node["v0"], "scenario.v0", s.v0);
  s.theta0 = scalar_or<double>(node["theta0"], "scenario.theta0", s.theta0);
  const YAML::Node corridor = node["corridor"];
  if (corridor.IsDefined()) {
    const Eigen::Vector2d edges = vec2(corridor, "scenario.corridor");
    s.v_lo = edges.x();
    s.v_hi = edges.y();
  }
  s.clearance = scalar_or<double>(node["clearance"], "scenario.clearance", s.clearance);
  s.front_offset =
      scalar_or<double>(node["front_offset"], "scenario.front_offset", default_front);
  s.n_waypoints = scalar_or<int>(node["n_waypoints"], "scenario.n_waypoints", s.n_waypoints);
  s.terrain = parse_terrain(node["terrain"]);
  s.seed = seed;

  const YAML::Node obstacles = node["obstacles"];
  if (obstacles.IsDefined()) {
    if (!obstacles.IsSequence()) fail("scenario.obstacles", "must be a sequence");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const std::string key = "scenario.obstacles[" + std::to_string(i) + "]";
      Obstacle ob;
      ob.center = vec2(obstacles[i]["center"], key + ".center");
      ob.radius = scalar<double>(obstacles[i]["radius"], key + ".radius");
      s.obstacles.push_back(ob);
    }
  }

  const YAML::Node random = node["random_obstacles"];
  if (random.IsDefined()) {
    const std::string key = "scenario.random_obstacles";
    const int count = scalar<int>(random["count"], key + ".count");
    if (count < 0) fail(key + ".count", "must be nonnegative");
    const auto scattered = scatter_obstacles(
        seed, count, scalar<double>(random["x_min"], key + ".x_min"),
        scalar<double>(random["x_max"], key + ".x_max"),
        scalar<double>(random["y_min"], key + ".y_min"),
        scalar<double>(random["y_max"], key + ".y_max"),
        scalar<double>(random["r_min"], key + ".r_min"),
        scalar<double>(random["r_max"], key + ".r_max"), {s.start, s.goal},
        scalar_or<double>(random["margin"], key + ".margin", 2.0));
    s.obstacles.insert(s.obstacles.end(), scattered.begin(), scattered.end());
  }
  return s;
}

RunConfig build(const YAML::Node& root, bool apply_env) {
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  RunConfig c;

  c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  c.output_dir = scalar_or<std::string>(root["output_dir"], "output_dir", c.output_dir);
  if (apply_env) {
    if (const char* dir = std::getenv("RPC_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
    if (const char* seed_text = std::getenv("RPC_SEED"); seed_text && *seed_text) {
      char* end = nullptr;
      const unsigned long long parsed = std::strtoull(seed_text, &end, 10);
      if (end == seed_text || *end != '\0')
        throw ConfigError("RPC_SEED: must be an unsigned integer");
      c.seed = parsed;
    }
  }

  const YAML::Node synth = root["synth"];
  if (synth.IsDefined()) {
    c.dt = scalar_or<double>(synth["dt"], "synth.dt", c.dt);
    c.eps = scalar_or<double>(synth["eps"], "synth.eps", c.eps);
    c.k = scalar_or<int>(synth["k"], "synth.k", c.k);
  }
  c.horizon = scalar_or<double>(root["horizon"], "horizon", c.horizon);
  c.n_tilde = scalar_or<int>(root["n_tilde"], "n_tilde", c.n_tilde);
  c.cloud_samples = scalar_or<int>(root["cloud_samples"], "cloud_samples", c.cloud_samples);

  const YAML::Node lip = root["lipschitz"];
  if (lip.IsDefined()) {
    c.lipschitz.l_f = scalar_or<double>(lip["l_f"], "lipschitz.l_f", 0.0);
    c.lipschitz.l_g = scalar_or<double>(lip["l_g"], "lipschitz.l_g", 0.0);
    c.lipschitz.neighborhood_radius = scalar_or<double>(
        lip["neighborhood_radius"], "lipschitz.neighborhood_radius", 0.0);
  }

  const YAML::Node plant = root["plant"];
  if (plant.IsDefined()) {
    c.plant.l_r = scalar_or<double>(plant["l_r"], "plant.l_r", c.plant.l_r);
    c.plant.wheelbase = scalar_or<double>(plant["wheelbase"], "plant.wheelbase", c.plant.wheelbase);
    c.plant.mu = scalar_or<double>(plant["mu"], "plant.mu", c.plant.mu);
    c.plant.g = scalar_or<double>(plant["g"], "plant.g", c.plant.g);
    c.plant.a_max = scalar_or<double>(plant["a_max"], "plant.a_max", c.plant.a_max);
    c.plant_step = scalar_or<double>(plant["step"], "plant.step", c.plant_step);
  }

  c.scenario = parse_scenario(root["scenario"], c.seed, c.plant.wheelbase / 2.0);
  return c;
}

}  // namespace

std::vector<std::string> RunConfig::validate() const {
  if (!(dt > 0.0)) fail("synth.dt", "must be positive");
  if (!(eps > 0.0) || eps >= 1.0) fail("synth.eps", "must lie in (0, 1)");
  if (k < 1) fail("synth.k", "must be at least 1");
  if (!(horizon > 0.0)) fail("horizon", "must be positive");
  if (n_tilde < 1) fail("n_tilde", "must be at least 1");
  if (cloud_samples < 1) fail("cloud_samples", "must be at least 1");
  if (!(plant_step > 0.0)) fail("plant.step", "must be positive");
  const double ratio = dt / plant_step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    fail("plant.step", "must tile synth.dt into whole integrator steps");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
  plant.validate();
  lipschitz.validate();
  return scenario.validate();
}

RpcConfig RunConfig::rpc_config() const {
  RpcConfig rc;
  rc.dt = dt;
  rc.eps = eps;
  rc.k = k;
  rc.horizon = horizon;
  rc.n_tilde = n_tilde;
  rc.bounds = lipschitz;
  rc.cloud_samples = cloud_samples;
  rc.seed = seed;
  return rc;
}

RunConfig parse_run_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("config: cannot open " + path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return build(root, /*apply_env=*/true);
}

RunConfig parse_run_config_text(const std::string& text, bool apply_env) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return build(root, apply_env);
}

std::string serialize_run_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "n_tilde" << YAML::Value << c.n_tilde;
  out << YAML::Key << "cloud_samples" << YAML::Value << c.cloud_samples;
  out << YAML::Key << "synth" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << c.dt;
  out << YAML::Key << "eps" << YAML::Value << c.eps;
  out << YAML::Key << "k" << YAML::Value << c.k;
  out << YAML::EndMap;
  out << YAML::Key << "lipschitz" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "l_f" << YAML::Value << c.lipschitz.l_f;
  out << YAML::Key << "l_g" << YAML::Value << c.lipschitz.l_g;
  out << YAML::Key << "neighborhood_radius" << YAML::Value
      << c.lipschitz.neighborhood_radius;
  out << YAML::EndMap;
  out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "l_r" << YAML::Value << c.plant.l_r;
  out << YAML::Key << "wheelbase" << YAML::Value << c.plant.wheelbase;
  out << YAML::Key << "mu" << YAML::Value << c.plant.mu;
  out << YAML::Key << "g" << YAML::Value << c.plant.g;
  out << YAML::Key << "a_max" << YAML::Value << c.plant.a_max;
  out << YAML::Key << "step" << YAML::Value << c.plant_step;
  out << YAML::EndMap;
  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "start" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << c.scenario.start.x() << c.scenario.start.y() << YAML::EndSeq;
  out << YAML::Key << "goal" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << c.scenario.goal.x() << c.scenario.goal.y() << YAML::EndSeq;
  out << YAML::Key << "v0" << YAML::Value << c.scenario.v0;
  out << YAML::Key << "theta0" << YAML::Value << c.scenario.theta0;
  out << YAML::Key << "corridor" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << c.scenario.v_lo << c.scenario.v_hi << YAML::EndSeq;
  out << YAML::Key << "clearance" << YAML::Value << c.scenario.clearance;
  out << YAML::Key << "front_offset" << YAML::Value << c.scenario.front_offset;
  out << YAML::Key << "n_waypoints" << YAML::Value << c.scenario.n_waypoints;
  out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const Obstacle& ob : c.scenario.obstacles) {
    out << YAML::BeginMap;
    out << YAML::Key << "center" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << ob.center.x() << ob.center.y() << YAML::EndSeq;
    out << YAML::Key << "radius" << YAML::Value << ob.radius;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "terrain" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "default_r_c" << YAML::Value << c.scenario.terrain.default_r_c;
  out << YAML::Key << "bands" << YAML::Value << YAML::BeginSeq;
  for (const TerrainBand& band : c.scenario.terrain.bands) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "x_min" << YAML::Value << band.x_min;
    out << YAML::Key << "x_max" << YAML::Value << band.x_max;
    out << YAML::Key << "r_c" << YAML::Value << band.r_c;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;  // terrain
  out << YAML::EndMap;  // scenario
  out << YAML::EndMap;  // root
  std::ostringstream text;
  text << out.c_str() << "\n";
  return text.str();
}

}  // namespace rpc
