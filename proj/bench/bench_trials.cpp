#include "psgdlab/estimators.hpp"

#include <benchmark/benchmark.h>

using namespace psgdlab;

namespace {

GenErrorExperiment one_sided(std::size_t d, std::size_t n) {
  Vector direction(d);
  direction[0] = 1.0;
  return {LossModel::one_sided_quadratic(1.0, 1.0),
          ConvexSet::ball(d, 1.0),
          noisy_halfspace_sampler(direction, 0.1),
          n,
          StepSchedule::capped_for(ScheduleKind::inverse_sqrt, 1.0, 1.0),
          NoiseModel::none(),
          Vector(d)};
}

void gen_error(benchmark::State& state, Execution exec) {
  const auto exp = one_sided(5, 100);
  const RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_gen_error(exp, static_cast<std::size_t>(state.range(0)), 64, rng, exec));
  }
}

void delta_mean(benchmark::State& state, Execution exec) {
  const std::size_t d = 20;
  const RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_delta_mean(LossModel::counterexample(), rademacher_sampler(d),
                                                 static_cast<std::size_t>(state.range(0)),
                                                 ConvexSet::ball(d, 1.0), SupSearchConfig{}, 16, rng, exec));
  }
}

void minimizer(benchmark::State& state, Execution exec) {
  const RngStream rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen_error_at_minimizer(5, static_cast<std::size_t>(state.range(0)), 200, rng, {}, exec));
  }
}

}  // namespace

BENCHMARK_CAPTURE(gen_error, serial, Execution::serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gen_error, openmp, Execution::parallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(delta_mean, serial, Execution::serial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(delta_mean, openmp, Execution::parallel)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(minimizer, serial, Execution::serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(minimizer, openmp, Execution::parallel)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
