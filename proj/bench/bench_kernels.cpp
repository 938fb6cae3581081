#include <benchmark/benchmark.h>

#include <random>

#include "co2i/kernels.hpp"
#include "co2i/whatif.hpp"

namespace {

std::vector<double> tableau(int rows, int width) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> t(static_cast<size_t>(rows) * width);
  for (double& x : t) x = u(rng);
  return t;
}

template <auto Pivot>
void BM_pivot(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0)), width = rows + rows / 2;
  auto base = tableau(rows, width);
  std::vector<int> scratch;
  for (auto _ : state) {
    state.PauseTiming();
    auto t = base;
    state.ResumeTiming();
    for (int k = 0; k < 8; ++k) Pivot(t.data(), rows, width, k, k, scratch);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_pivot<co2i::kernels::pivot_serial>)->Name("pivot/serial")->Arg(200)->Arg(800);
BENCHMARK(BM_pivot<co2i::kernels::pivot_parallel>)->Name("pivot/omp")->Arg(200)->Arg(800);

void BM_whatif(benchmark::State& state) {
  const auto s = co2i::make_mc_system(2);
  const auto d = co2i::solve_dispatch(s);
  co2i::WhatIfOptions o;
  o.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(co2i::compute_whatif(s, d, o));
}
BENCHMARK(BM_whatif)->Name("whatif_sweep/mc2")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_fd_sweep(benchmark::State& state) {
  const auto s = co2i::make_mc_system(3);
  const auto d = co2i::solve_dispatch(s);
  co2i::WhatIfOptions o;
  o.parallel = state.range(0) != 0;
  const auto w = co2i::compute_whatif(s, d, o);
  for (auto _ : state) {
    auto copy = w;
    benchmark::DoNotOptimize(co2i::fd_check(s, d, copy, 0, o));
  }
}
BENCHMARK(BM_fd_sweep)->Name("fd_sweep/mc3")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_dispatch(benchmark::State& state) {
  const auto s = co2i::make_mc_system(2);
  co2i::DispatchOptions o;
  o.lp.parallel_pivot = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(co2i::solve_dispatch(s, o));
}
BENCHMARK(BM_dispatch)->Name("dispatch/mc2")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
