// Serial against OpenMP timings for the three counting kernels.

#include <benchmark/benchmark.h>

#include <map>

#include "incpose/families.hpp"
#include "incpose/naive.hpp"
#include "incpose/primal_dual.hpp"
#include "incpose/synth.hpp"

using namespace incpose;

namespace {

const std::vector<Correspondence>& scene(std::size_t n) {
  static std::map<std::size_t, std::vector<Correspondence>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    SceneConfig sc;
    sc.n = n;
    sc.seed = 1;
    it = cache.emplace(n, generate_scene(sc).correspondences).first;
  }
  return it->second;
}

void BM_Naive(benchmark::State& st) {
  const auto& cs = scene(std::size_t(st.range(0)));
  NaiveOptions opt;
  opt.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(naive_count(cs, 0.03, AnalyticConstants{}, opt).hist.total());
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PrimalDual(benchmark::State& st) {
  const auto& cs = scene(std::size_t(st.range(0)));
  PrimalDualOptions opt;
  opt.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(primal_dual_solve(cs, 0.03, AnalyticConstants{}, opt).candidates);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Canonical(benchmark::State& st) {
  const auto& cs = scene(std::size_t(st.range(0)));
  CanonicalOptions opt;
  opt.parallel = st.range(1) != 0;
  opt.early_exit = true;
  for (auto _ : st) benchmark::DoNotOptimize(canonical_solve(cs, 0.03, AnalyticConstants{}, opt).candidates);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

// Second argument: 0 serial, 1 parallel.
BENCHMARK(BM_Naive)->ArgsProduct({{2000, 8000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PrimalDual)->ArgsProduct({{2000, 8000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Canonical)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
