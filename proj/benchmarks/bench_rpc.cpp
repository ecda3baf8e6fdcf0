#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "rpc/control_loop.hpp"
#include "rpc/learn.hpp"
#include "rpc/planner.hpp"
#include "rpc/plant.hpp"
#include "rpc/reach.hpp"
#include "rpc/synth.hpp"
#include "rpc/types.hpp"

namespace {

rpc::ProxyParams reference_proxy() {
  rpc::ProxyParams p;
  p.anchor = Eigen::Vector2d(0.0, 1.0);
  p.drift = Eigen::Vector2d::Zero();
  p.b = 1.0;
  p.c = 3.0;
  return p;
}

void bm_actuated_cloud(benchmark::State& state) {
  const rpc::ProxyParams p = reference_proxy();
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    rpc::ReachCloud cloud = rpc::grs_actuated(p, 0.1, samples, 7);
    benchmark::DoNotOptimize(cloud.points.data());
  }
}
BENCHMARK(bm_actuated_cloud)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void bm_identify_local_model(benchmark::State& state) {
  const rpc::LipschitzBounds bounds{0.0, 3.0, 0.25};
  rpc::AffinePlant plant(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d::Zero(),
                         Eigen::Matrix2d::Identity(), 1e-3);
  const rpc::CycleRecord record =
      rpc::run_cycle(plant, rpc::ControlInput::zero(2), 0.1, 0.075);
  for (auto _ : state) {
    rpc::LocalModel model = rpc::identify_local_model(record, bounds);
    benchmark::DoNotOptimize(model.b);
  }
}
BENCHMARK(bm_identify_local_model);

void bm_tracking_run(benchmark::State& state) {
  const Eigen::Vector2d anchor(0.0, 1.0);
  const rpc::LipschitzBounds bounds{0.0, 3.0, 0.25};
  const rpc::LocalModel model =
      rpc::make_local_model(rpc::partition(anchor, 2), Eigen::Vector2d::Zero(),
                            Eigen::Matrix2d::Identity(), Eigen::VectorXd(), bounds);
  const rpc::SynthConfig cfg = rpc::make_synth_config(model, bounds, 0.015, 0.1, 5);
  const Eigen::Vector2d target =
      anchor + 0.29 * Eigen::Vector2d(1.0, 0.5).normalized();
  for (auto _ : state) {
    rpc::AffinePlant plant(anchor, Eigen::Vector2d::Zero(),
                           Eigen::Matrix2d::Identity(), 1e-3);
    rpc::SynthResult res = rpc::algorithm1(plant, model, bounds, target, cfg);
    benchmark::DoNotOptimize(res.cycles.data());
  }
}
BENCHMARK(bm_tracking_run)->Unit(benchmark::kMillisecond);

void bm_optimize_path(benchmark::State& state) {
  rpc::Scenario field;
  field.start = Eigen::Vector2d(0.0, 0.0);
  field.goal = Eigen::Vector2d(12.0, 0.0);
  field.n_waypoints = 21;
  field.obstacles.push_back({Eigen::Vector2d(3.0, 0.3), 0.7});
  field.obstacles.push_back({Eigen::Vector2d(6.0, -0.4), 0.8});
  field.obstacles.push_back({Eigen::Vector2d(8.0, 0.5), 0.6});
  for (auto _ : state) {
    rpc::WaypointPath path = rpc::optimize_path(field);
    benchmark::DoNotOptimize(path.points.data());
  }
}
BENCHMARK(bm_optimize_path)->Unit(benchmark::kMillisecond);

void bm_corridor_run(benchmark::State& state) {
  rpc::Scenario scenario;
  scenario.start = Eigen::Vector2d(0.0, 0.0);
  scenario.goal = Eigen::Vector2d(1.5, 0.0);
  scenario.n_waypoints = 5;
  const rpc::WaypointPath path = rpc::optimize_path(scenario);

  rpc::BicycleParams params;
  params.a_max = 8.0;
  rpc::TerrainMap terrain;
  terrain.default_r_c = 0.2;
  rpc::RpcConfig cfg;
  cfg.bounds = rpc::LipschitzBounds{0.0, 4.0, 0.25};
  cfg.cloud_samples = 128;

  for (auto _ : state) {
    rpc::BicyclePlant plant(
        Eigen::Vector4d(scenario.theta0, scenario.v0, 0.0, 0.0), params, terrain,
        1e-3);
    rpc::RpcResult res = rpc::algorithm2(plant, scenario, path, cfg);
    benchmark::DoNotOptimize(res.outer.data());
  }
}
BENCHMARK(bm_corridor_run)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
