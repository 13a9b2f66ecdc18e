#include <benchmark/benchmark.h>

#include "emphatic/envs.hpp"
#include "emphatic/harness/config.hpp"
#include "emphatic/harness/runner.hpp"
#include "emphatic/montecarlo.hpp"

using namespace emphatic;
using namespace emphatic::harness;

namespace {

ExperimentConfig sweep_config() {
  ExperimentConfig c;
  c.env = "three-state";
  c.lambda_a = {0.0, 0.5, 1.0};
  c.actor_stepsizes = {0.05, 0.2};
  c.steps = 5000;
  c.log_interval = 500;
  c.runs = 4;
  return c;
}

void BM_SweepSerial(benchmark::State& state) {
  const ExperimentConfig c = sweep_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_serial(c));
}

void BM_SweepParallel(benchmark::State& state) {
  const ExperimentConfig c = sweep_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_parallel(c));
}

void BM_McGradient(benchmark::State& state, Execution exec) {
  const DiscreteEnv env = make_eleven_state();
  const SoftmaxLinearPolicy pi(2, 10);
  for (auto _ : state) benchmark::DoNotOptimize(mc_ace_gradient(env, pi, 1.0, 20000, 1, exec));
}

void BM_McDpg(benchmark::State& state, Execution exec) {
  const ContinuousEnv env = make_continuous();
  const DeterministicLinearPolicy pi(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(mc_dpg_gradient(env, pi, DpgWeighting::ExactEmphasis, 20000, 1, exec));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_McGradient, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_McGradient, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_McDpg, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_McDpg, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
