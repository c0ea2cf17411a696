// Serial reference paths against the fast / parallel ones:
//   direct KL sum vs FFTW sine synthesis, serial Monte Carlo loop vs OpenMP batches.

#include <benchmark/benchmark.h>

#include <random>

#include "bdf2spde/harness.hpp"
#include "bdf2spde/wiener.hpp"

using namespace bdf2spde;

namespace {

std::vector<double> random_modes(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

void BM_DirectSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const FemSpace space(n);
  const NoiseSpec spec{n, 1.0, 1e-3};
  const auto modes = random_modes(n);
  for (auto _ : state) benchmark::DoNotOptimize(increment_at_nodes(spec, modes, space));
}

void BM_SineSynthesis(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const FemSpace space(n);
  const NoiseSpec spec{n, 1.0, 1e-3};
  const SineSynthesis synth(spec, space);
  const auto modes = random_modes(n);
  Coeffs out(n);
  for (auto _ : state) {
    synth.apply(modes, out);
    benchmark::DoNotOptimize(out.data());
  }
}

ExperimentConfig bench_config(ProblemKind kind) {
  ExperimentConfig c;
  c.problem = kind;
  c.sigma = kind == ProblemKind::heat ? 1.0 : 0.25;
  c.n_h = 127;
  c.modes = 127;
  c.n_ref = 1024;
  c.levels = {32, 64, 128, 256};
  c.samples = 16;
  return c;
}

void BM_ExperimentSerial(benchmark::State& state) {
  const ExperimentConfig c = bench_config(static_cast<ProblemKind>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(c));
}

void BM_ExperimentParallel(benchmark::State& state) {
  const ExperimentConfig c = bench_config(static_cast<ProblemKind>(state.range(0)));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, workers));
}

}  // namespace

BENCHMARK(BM_DirectSum)->Arg(255)->Arg(1023);
BENCHMARK(BM_SineSynthesis)->Arg(255)->Arg(1023)->Arg(4095);
BENCHMARK(BM_ExperimentSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)
    ->ArgsProduct({{0, 1}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
