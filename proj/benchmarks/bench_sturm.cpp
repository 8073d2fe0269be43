#include <benchmark/benchmark.h>

#include "grushin/model.hpp"
#include "grushin/scaling.hpp"
#include "grushin/sturm1d.hpp"

using namespace grushin;

namespace {

TridiagonalOperator operator_of_size(std::size_t n) {
  const auto p = derive_params(1, 3.0);
  return discretize(model_potential(p, 1.0), Grid1D(20.0, n), BoundaryCondition::dirichlet);
}

void BM_CountBelow(benchmark::State& state) {
  const auto t = operator_of_size(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_below(t, 500.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CountBelow)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity(benchmark::oN);

void BM_EigenvaluesBelow(benchmark::State& state) {
  const auto t = operator_of_size(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues_below(t, 200.0, default_tolerance(t)));
}
BENCHMARK(BM_EigenvaluesBelow)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_Eigenfunction(benchmark::State& state) {
  const auto t = operator_of_size(static_cast<std::size_t>(state.range(0)));
  const double lambda = lowest_eigenvalues(t, 1, default_tolerance(t))[0];
  for (auto _ : state) benchmark::DoNotOptimize(eigenfunction(t, lambda));
}
BENCHMARK(BM_Eigenfunction)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_ReferenceSpectrum(benchmark::State& state) {
  const auto p = derive_params(1, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(reference_spectrum(p, static_cast<std::size_t>(state.range(0)), 1e-8));
}
BENCHMARK(BM_ReferenceSpectrum)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ModelTable(benchmark::State& state) {
  const auto p = derive_params(1, 3.0);
  const double lambda = static_cast<double>(state.range(0));
  const auto cross = circle_spectrum(2 * M_PI, 1.01 * required_mu_max(p, lambda));
  const ModelOperator m(p, cross, auto_strip_width(p, cross, lambda));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_spectrum(m, lambda));
}
BENCHMARK(BM_ModelTable)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
