#include "ktg/analysis.hpp"
#include "ktg/fixtures.hpp"
#include "ktg/linalg.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ktg;

void BM_Expm(benchmark::State& state) {
  const RealMatrix A = grcar(static_cast<Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(expm(A, 1.0));
}
BENCHMARK(BM_Expm)->Arg(10)->Arg(50)->Arg(100);

void BM_Lyapunov(benchmark::State& state) {
  const Index n = static_cast<Index>(state.range(0));
  const RealMatrix A = grcar(n);
  const RealMatrix Q = RealMatrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(A, Q));
}
BENCHMARK(BM_Lyapunov)->Arg(10)->Arg(50)->Arg(100);

void BM_HinfNorm(benchmark::State& state) {
  const Index n = static_cast<Index>(state.range(0));
  const RealMatrix A = grcar(n);
  const StateSpace sys(A, RealMatrix::Identity(n, n),
                       RealMatrix::Identity(n, n));
  for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(sys, 1e-6));
}
BENCHMARK(BM_HinfNorm)->Arg(10)->Arg(30)->Arg(50);

void BM_KreissGrcar(benchmark::State& state) {
  const RealMatrix A = grcar(static_cast<Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kreiss_constant(A, 1e-3));
}
BENCHMARK(BM_KreissGrcar)->Unit(benchmark::kMillisecond)->Arg(10)->Arg(20)->Arg(30);

void BM_TransientGrowth(benchmark::State& state) {
  const RealMatrix A = example_7x7_A();
  for (auto _ : state) benchmark::DoNotOptimize(transient_growth(A, 1e-3));
}
BENCHMARK(BM_TransientGrowth)->Unit(benchmark::kMillisecond);

void BM_PseudoAbscissa(benchmark::State& state) {
  const RealMatrix A = grcar(static_cast<Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pseudospectral_abscissa(A, 1e-2));
}
BENCHMARK(BM_PseudoAbscissa)->Unit(benchmark::kMillisecond)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
