#include <benchmark/benchmark.h>

#include "dvf/field.hpp"
#include "dvf/mitigation.hpp"
#include "dvf/registration.hpp"
#include "dvf/scene.hpp"

namespace {

struct Pair {
  dvf::SensorModel sensor = dvf::default_sensor_sim();
  dvf::PointCloud cloud1;
  dvf::PointCloud cloud2;
};

const Pair& pair() {
  static const Pair p = [] {
    Pair out;
    const auto scene = dvf::build_default_scene();
    const auto pose1 = dvf::RigidTransform::translation_only({0, 0, 3});
    const auto pose2 = dvf::RigidTransform::from_euler({1, 1, 3}, 0, 0, 0.05);
    out.cloud1 = dvf::raycast_cloud(scene, pose1, out.sensor);
    out.cloud2 = dvf::register_with_truth(dvf::raycast_cloud(scene, pose2, out.sensor), pose1, pose2).first;
    return out;
  }();
  return p;
}

void BM_Raycast(benchmark::State& state) {
  const auto scene = dvf::build_default_scene();
  const auto sensor = dvf::default_sensor_sim();
  const auto pose = dvf::RigidTransform::translation_only({0, 0, 3});
  for (auto _ : state) benchmark::DoNotOptimize(dvf::raycast_cloud(scene, pose, sensor));
  state.SetItemsProcessed(state.iterations() * sensor.elevation_channels * sensor.azimuth_steps);
}
BENCHMARK(BM_Raycast)->Unit(benchmark::kMillisecond);

void BM_ComputeField(benchmark::State& state) {
  const auto& p = pair();
  const auto grid = dvf::simulation_grid();
  for (auto _ : state) benchmark::DoNotOptimize(dvf::compute_field(p.cloud1, p.cloud2, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(p.cloud1.size() + p.cloud2.size()));
}
BENCHMARK(BM_ComputeField)->Unit(benchmark::kMillisecond);

void BM_FovFilter(benchmark::State& state) {
  const auto& p = pair();
  const auto fov = dvf::default_fov_filter(p.sensor);
  for (auto _ : state) benchmark::DoNotOptimize(dvf::fov_filter(p.cloud1, p.cloud2.sensor_origin(), fov));
}
BENCHMARK(BM_FovFilter)->Unit(benchmark::kMillisecond);

void BM_ShadowFilter(benchmark::State& state) {
  const auto& p = pair();
  const auto params = dvf::default_shadow_filter(p.sensor);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dvf::shadow_filter(p.cloud1, p.cloud2, p.cloud2.sensor_origin(), params));
  }
}
BENCHMARK(BM_ShadowFilter)->Unit(benchmark::kMillisecond);

void BM_IcpTranslation(benchmark::State& state) {
  const auto& p = pair();
  const auto moved = dvf::transform_cloud(p.cloud1, dvf::RigidTransform::translation_only({0.1, 0.05, 0}));
  for (auto _ : state) benchmark::DoNotOptimize(dvf::icp_register(p.cloud1, moved, dvf::RigidTransform{}));
}
BENCHMARK(BM_IcpTranslation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
