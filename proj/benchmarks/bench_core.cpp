// Microbenchmarks for the hot pieces of the Monte Carlo integrator: the
// counter RNG, the sine transform pair, one scheme step, and the analytic
// sweep used by the convergence experiments.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sgee/exp_euler.hpp"
#include "sgee/experiment.hpp"
#include "sgee/nemytskij.hpp"
#include "sgee/rng.hpp"

using namespace sgee;

static void BM_NormalFill(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> out(n);
  std::uint64_t counter = 0;
  for (auto _ : state) {
    rng::fill_standard_normals(SeedPath{1, 2, counter++}, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}
BENCHMARK(BM_NormalFill)->Arg(64)->Arg(256)->Arg(512);

static void BM_SineTransformPair(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  CollocationGrid grid(n);
  std::vector<double> a(grid.points(), 0.25), b(grid.points());
  for (auto _ : state) {
    grid.dst(a.data(), b.data());
    grid.dst(b.data(), a.data());
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_SineTransformPair)->Arg(64)->Arg(256)->Arg(512);

static void BM_NonlinearPath(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  SchemeConfig cfg = SchemeConfig::uniform(n, 1.0, 256, CovarianceSpec::white(),
                                           nonlinearity::sine(1.0),
                                           power_law_initial(n));
  ExpEulerEngine engine(cfg);
  std::vector<double> out;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    engine.run(SeedPath{7, stream++, 0}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(cfg.steps));
}
BENCHMARK(BM_NonlinearPath)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_AnalyticTemporalSweep(benchmark::State& state) {
  ExperimentPlan plan;
  plan.kind = ExperimentPlan::Kind::weak_rate_time;
  plan.n = static_cast<std::size_t>(state.range(0));
  plan.T = 1.0;
  for (int e = 4; e <= 10; ++e) plan.tau_sweep.push_back(std::pow(2.0, -e));
  plan.cov = CovarianceSpec::power_decay(2.0);
  plan.f = nonlinearity::zero();
  plan.functional.modes = {{1, 1.0}, {2, 0.5}};
  plan.raw_json = "{}";
  for (auto _ : state) {
    const ExperimentOutcome out = run_weak_rate_time(plan, RunContext{});
    benchmark::DoNotOptimize(out.fit.slope);
  }
}
BENCHMARK(BM_AnalyticTemporalSweep)->Arg(512)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
