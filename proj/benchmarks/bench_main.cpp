#include <benchmark/benchmark.h>

#include <random>

#include "wegnerflow/acceptance.hpp"
#include "wegnerflow/flow.hpp"
#include "wegnerflow/geometry.hpp"
#include "wegnerflow/models.hpp"

using namespace wegnerflow;

namespace {

void BM_WegnerRhs(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const HermitianOperator h = random_hermitian(state.range(0), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow_rhs(h, wegner_generator(h)));
  }
}
BENCHMARK(BM_WegnerRhs)->Arg(8)->Arg(32)->Arg(64);

void BM_FlowRandom(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const HermitianOperator h = random_hermitian(state.range(0), rng);
  FlowConfig cfg;
  cfg.l_max = 50.0;
  cfg.stop_offdiag = 1e-18;
  cfg.sampling = SampleEvery{1000};
  for (auto _ : state) {
    const FlowTrajectory t = integrate_flow(h, WegnerGenerator{}, cfg);
    state.counters["steps"] = static_cast<double>(t.steps);
  }
}
BENCHMARK(BM_FlowRandom)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Expm(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Matrix m = random_hermitian(state.range(0), rng).matrix();
  const AntiHermitianOperator k = AntiHermitianOperator::symmetrized(Complex(0.0, 1.0) * m);
  for (auto _ : state) benchmark::DoNotOptimize(expm_antihermitian(k));
}
BENCHMARK(BM_Expm)->Arg(8)->Arg(32)->Arg(64);

void BM_MetricSqueeze(benchmark::State& state) {
  const ParametrizedFamily f = squeeze_family(0, static_cast<int>(state.range(0)));
  RealVector p(2);
  p << 0.3, 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(fs_metric(f, p));
}
BENCHMARK(BM_MetricSqueeze)->Arg(30)->Arg(60);

void BM_MetricSpin(benchmark::State& state) {
  const ParametrizedFamily f = spin_family(0.5, 0.5);
  RealVector p(2);
  p << 0.9, 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(fs_metric(f, p));
}
BENCHMARK(BM_MetricSpin);

}  // namespace

BENCHMARK_MAIN();
