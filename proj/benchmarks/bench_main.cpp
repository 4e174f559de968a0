#include <benchmark/benchmark.h>

#include <vector>

#include "caputo_ms/ensemble.hpp"
#include "caputo_ms/kernel.hpp"
#include "caputo_ms/tfbm.hpp"

using namespace caputo_ms;

namespace {

void BM_KernelWeights(benchmark::State& state) {
  const FracParams p{0.75, 4.0};
  const TimeGrid grid = TimeGrid::from_steps(static_cast<std::size_t>(state.range(0)), 1.0 / 256.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_weights(p, grid));
}
BENCHMARK(BM_KernelWeights)->Arg(512)->Arg(2048);

void BM_PhiEval(benchmark::State& state) {
  const NoiseParams n{0.7, 1.0};
  double gap = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi_eval(n, gap));
    gap = gap > 5.0 ? 0.01 : gap * 1.1;
  }
}
BENCHMARK(BM_PhiEval);

void BM_IncrementCovariance(benchmark::State& state) {
  const NoiseParams n{0.7, 1.0};
  const TimeGrid grid = TimeGrid::from_steps(static_cast<std::size_t>(state.range(0)), 1.0 / 256.0);
  for (auto _ : state) benchmark::DoNotOptimize(IncrementCovariance(n, grid));
}
BENCHMARK(BM_IncrementCovariance)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_EnsembleBatch(benchmark::State& state) {
  Model model;
  model.frac = {0.75, 4.0};
  model.noise = {0.7, 1.0};
  model.field = linear_decay(1, 0.5);
  const TimeGrid grid = TimeGrid::from_steps(static_cast<std::size_t>(state.range(0)), 1.0 / 256.0);
  auto ctx = std::make_shared<const NoiseContext>(model.frac, model.noise, grid);
  const Ensemble ens(model, grid, ctx);
  const std::vector<double> x0{1.0};
  const CocycleState sc = exponential_forcing(model.frac, x0, BasePoint{}, grid);
  MonteCarlo mc;
  mc.reps = kBatchWidth;
  mc.workers = 1;
  for (auto _ : state)
    ens.run(std::span<const CocycleState>(&sc, 1), grid.steps(), mc, false,
            [](const BatchView& v) { benchmark::DoNotOptimize(v.x); });
}
BENCHMARK(BM_EnsembleBatch)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
