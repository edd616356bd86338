// Serial reference vs OpenMP path for the data-parallel kernels.
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "cbsel/beampattern.hpp"
#include "cbsel/montecarlo.hpp"
#include "cbsel/units.hpp"

using namespace cbsel;

namespace {

ScenarioParams params() {
  ScenarioParams p;
  p.num_candidates = 512;
  p.num_selected = 256;
  p.group_size = 32;
  p.disk_radius = 5.0;
  p.unintended_directions = {deg_to_rad(65.0)};
  p.noise_power = 0.05;
  p.target_snr = 100.0;
  p.shadowing = {0.0, 0.2};
  return p;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_SampleBeampattern(benchmark::State& state) {
  const Scenario s(params());
  const auto net = sample_network(s);
  std::vector<std::size_t> nodes(256);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  const auto ph = synchronize(net, nodes, 0.0);
  const auto grid = uniform_angle_grid(3601);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_beampattern(net, nodes, ph, 1.0, grid, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}

void BM_AverageBeampattern(benchmark::State& state) {
  const Scenario s(params());
  const auto grid = uniform_angle_grid(721);
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_beampattern(s, 256, 16, 1.0, SeedTree(1), grid, exec_of(state)));
  }
}

void BM_SweepExpectedTrials(benchmark::State& state) {
  SweepSpec spec;
  spec.base = params();
  spec.axis = SweepAxis::InrThreshold;
  spec.values = {db_to_linear(5.0), db_to_linear(10.0)};
  spec.runs_per_point = 64;
  spec.mode = ChannelMode::RedrawPerTrial;
  spec.execution = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_expected_trials(spec));
}

}  // namespace

// Arg 0 = serial reference, 1 = parallel.
BENCHMARK(BM_SampleBeampattern)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AverageBeampattern)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepExpectedTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
