#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "ucahrpe/bessel.hpp"
#include "ucahrpe/channel_model.hpp"
#include "ucahrpe/delay_estimator.hpp"
#include "ucahrpe/ml_refiner.hpp"
#include "ucahrpe/phase_mode.hpp"
#include "ucahrpe/trajectory.hpp"

using namespace uca;

namespace {

const ArrayGeometry kFull{0.5, 720};
const FrequencyGrid kFullGrid{28e9, 30e9, 750};
const PathParams kPath{15e-9, std::numbers::pi, deg2rad(70.0), 5.0, {1.0, 0.0}};

ArrayOutput one_path(const ArrayGeometry& g, const FrequencyGrid& f) {
  const std::vector<PathParams> paths{kPath};
  const std::vector<GainMask> masks{GainMask::all_visible(g.num_elements)};
  return synthesize_channel(g, f, paths, masks, {});
}

void BM_BesselSequence(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bessel_j_sequence(order, 293.5));
}
BENCHMARK(BM_BesselSequence)->Arg(300)->Arg(1000);

void BM_PhaseModeTransform(benchmark::State& state) {
  const auto out = one_path(kFull, kFullGrid);
  const int M = max_mode(kFull, kFullGrid);
  for (auto _ : state) benchmark::DoNotOptimize(phase_mode_transform(out, M));
  state.SetLabel("P=720 K=750");
}
BENCHMARK(BM_PhaseModeTransform)->Unit(benchmark::kMillisecond);

void BM_DelayAzimuthSpectrum(benchmark::State& state) {
  const auto out = one_path(kFull, kFullGrid);
  const auto pm = phase_mode_transform(out, max_mode(kFull, kFullGrid));
  for (auto _ : state) benchmark::DoNotOptimize(delay_azimuth_spectrum(pm, 2, 4));
}
BENCHMARK(BM_DelayAzimuthSpectrum)->Unit(benchmark::kMillisecond);

void BM_EstimateElement(benchmark::State& state) {
  const FrequencyGrid f{28e9, 30e9, static_cast<std::size_t>(state.range(0))};
  std::vector<Complex> y(f.num_points);
  for (std::size_t k = 0; k < y.size(); ++k)
    y[k] = std::polar(1.0, -kTwoPi * f.frequency(k) * 20.1e-9) +
           std::polar(0.5, 1.0 - kTwoPi * f.frequency(k) * 31.7e-9);
  const SageConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_element(y, f, cfg));
}
BENCHMARK(BM_EstimateElement)->Arg(128)->Arg(750)->Unit(benchmark::kMicrosecond);

void BM_RefineAnglesDistance(benchmark::State& state) {
  const auto out = one_path(kFull, kFullGrid);
  Trajectory traj;
  traj.selections.resize(kFull.num_elements);
  for (std::size_t p = 0; p < kFull.num_elements; ++p) {
    const auto e = element_path_params(kFull, kPath, p);
    traj.selections[p] = ElementPathEstimate{e.delay, e.amplitude};
  }
  traj.support_count = kFull.num_elements;
  traj.elevation = deg2rad(72.0);
  traj.init_delay = kPath.delay;
  traj.init_azimuth = kPath.azimuth + deg2rad(0.3);
  const auto h = reconstruct_trajectory_output(traj, kFullGrid);
  const RefineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(refine_angles_distance(h, traj, cfg, kFull, kFullGrid));
}
BENCHMARK(BM_RefineAnglesDistance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
