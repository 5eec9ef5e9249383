// Parallel overlap-save against its serial reference and direct convolution.
// Run with FTTM_THREADS unset to use every core.

#include <benchmark/benchmark.h>

#include <random>

#include "fttm/filters.hpp"
#include "fttm/kernels.hpp"
#include "fttm/parallel.hpp"

using namespace fttm;

namespace {

constexpr double kFs = 40e9;

std::vector<Complex> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<Complex> x(n);
  for (auto& v : x) v = {g(rng), g(rng)};
  return x;
}

const FirKernel& kernel() {
  static const FirKernel k = design_kernel(filter::Lorentzian{0.0, 20e6}, kFs, 1 << 20);
  return k;
}

template <auto Fn>
void run(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, kernel()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["taps"] = static_cast<double>(kernel().length());
  state.counters["threads"] = parallel::max_threads();
}

}  // namespace

BENCHMARK(run<kernels::overlap_save>)->Name("overlap_save")->RangeMultiplier(4)->Range(1 << 16, 1 << 22)->UseRealTime();
BENCHMARK(run<kernels::overlap_save_serial>)->Name("overlap_save_serial")->RangeMultiplier(4)->Range(1 << 16, 1 << 22)->UseRealTime();
BENCHMARK(run<kernels::direct_convolution>)->Name("direct_convolution")->Arg(1 << 14)->Arg(1 << 16)->UseRealTime();

int main(int argc, char** argv) {
  parallel::configure_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}
