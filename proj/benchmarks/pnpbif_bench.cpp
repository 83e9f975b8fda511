#include <benchmark/benchmark.h>

#include "pnpbif/bifurcation.hpp"
#include "pnpbif/geometry.hpp"
#include "pnpbif/governing.hpp"

using namespace pnpbif;

namespace {

const ChannelProfile kCp = ChannelProfile::symmetric_default();
const BifVector kRoot{17.255988296778262, 9.5872064853295296, -190.98900720766056,
                      -44.875338958027187};

void BM_GoverningResidual(benchmark::State& state) {
  ScaledBoundary bc(4.0, 2.0, 1.0);
  double A = 2.0;
  for (auto _ : state) {
    double I = scaled_current(A, bc, kCp);
    benchmark::DoNotOptimize(governing_residual(A, I, bc, kCp));
  }
}
BENCHMARK(BM_GoverningResidual);

void BM_BifResidual(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bif_residual(Species::cation, 2.0, kRoot, kCp));
}
BENCHMARK(BM_BifResidual);

void BM_BifResidualUnexpanded(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(bif_residual_unexpanded(Species::cation, 2.0, kRoot, kCp));
}
BENCHMARK(BM_BifResidualUnexpanded);

void BM_SolveGoverning(benchmark::State& state) {
  GoverningOptions opt;
  opt.samples = static_cast<int>(state.range(0));
  ScaledBoundary bc(4.0, 2.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_governing(bc, kCp, {}, opt));
}
BENCHMARK(BM_SolveGoverning)->Arg(512)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_AlphaBeta(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> x(n + 1), h(n + 1), D(n + 1, 1.0);
  for (int i = 0; i <= n; ++i) {
    x[i] = i == n ? 1.0 : static_cast<double>(i) / n;
    h[i] = 1.0 + x[i];
  }
  for (auto _ : state) {
    TabulatedProfile p(x, h, D);
    benchmark::DoNotOptimize(alpha_beta(p, ChargeProfile{}));
  }
}
BENCHMARK(BM_AlphaBeta)->Arg(2000)->Arg(20000);

void BM_MultiStart(benchmark::State& state) {
  SolverConfig cfg;
  cfg.workers = static_cast<unsigned>(state.range(0));
  MultiStartBox box{{-3.0, -3.0}, {3.0, 3.0}, {20, 20}};
  SystemFunction F = [](const Vector& x) {
    return Vector{std::sin(x[0]) - 0.5 * x[1], x[0] * x[0] + x[1] * x[1] - 4.0};
  };
  for (auto _ : state) benchmark::DoNotOptimize(multi_start(F, box, cfg));
}
BENCHMARK(BM_MultiStart)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveBifurcation(benchmark::State& state) {
  SolverConfig cfg;
  cfg.workers = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        solve_bifurcation(Species::cation, 2.0, kCp, default_bifurcation_box(), cfg));
}
BENCHMARK(BM_SolveBifurcation)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
