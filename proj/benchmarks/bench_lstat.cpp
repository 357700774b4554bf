#include <benchmark/benchmark.h>
#include <bisurv/copula.hpp>
#include <bisurv/kernel_hazard.hpp>
#include <bisurv/km.hpp>
#include <bisurv/lstat.hpp>

using namespace bisurv;

namespace {

Scenario cell(std::size_t n) {
  Scenario sc;
  sc.theta = 2.0;
  sc.c = 3.0;
  sc.n_per_arm = n;
  sc.cfg.tau_b = 0.5;
  sc.cfg.weight.gamma = 1.0;
  sc.cfg.weight.eta = 1.0;
  return sc;
}

TrialDataset sample(std::size_t n) {
  ReplicateRng rng(7, 0);
  return gen_trial(cell(n), rng);
}

void BM_PooledKm(benchmark::State& state) {
  const auto ds = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pooled_km(ds));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.n_total()));
}
BENCHMARK(BM_PooledKm)->Arg(100)->Arg(500)->Arg(2000);

void BM_HazardFit(benchmark::State& state) {
  const auto ds = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hazard_xt(ds, 0, 0.0, 0.5, HazardOptions{}));
}
BENCHMARK(BM_HazardFit)->Arg(500)->Arg(2000);

void BM_LStatBoth(benchmark::State& state) {
  auto sc = cell(static_cast<std::size_t>(state.range(0)));
  if (state.range(1) == 1) sc.cfg.covariance = CovarianceForm::marginal;
  ReplicateRng rng(7, 0);
  const auto ds = gen_trial(sc, rng);
  for (auto _ : state) benchmark::DoNotOptimize(l_statistic_both(ds, sc.cfg));
}
BENCHMARK(BM_LStatBoth)->Args({500, 0})->Args({500, 1})->Args({2000, 0});

// one simulation replicate end to end: draw + validate + both modes
void BM_Replicate(benchmark::State& state) {
  const auto sc = cell(500);
  std::uint64_t r = 0;
  for (auto _ : state) {
    ReplicateRng rng(sc.seed, r++);
    benchmark::DoNotOptimize(l_statistic_both(gen_trial(sc, rng), sc.cfg));
  }
}
BENCHMARK(BM_Replicate);

}  // namespace
BENCHMARK_MAIN();
