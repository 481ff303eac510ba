#include <benchmark/benchmark.h>

#include "glmmsel/covariance.hpp"
#include "glmmsel/local_search.hpp"
#include "glmmsel/path.hpp"
#include "glmmsel/threshold.hpp"

using namespace glmmsel;

namespace {

Dataset make_data(Index n, Index p, double rho = 0.5) {
  SimConfig sim;
  sim.n_total = n;
  sim.p = p;
  sim.rho = rho;
  sim.seed = 42;
  return standardize(generate_synthetic(sim).data);
}

void BM_Threshold(benchmark::State& state) {
  double b = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(threshold(b, 0.2, 0.1, 0.5, 1.3));
    b += 1e-9;
  }
}
BENCHMARK(BM_Threshold);

void BM_RankOneUpdate(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 20);
  CovarianceState cov = build_state(d, Eigen::VectorXd::Zero(d.p()));
  double sign = 1.0;
  for (auto _ : state) {
    rank_one_update(cov, d, 3, 0.5 * sign);
    sign = -sign;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RankOneUpdate)->Arg(200)->Arg(1000)->Arg(5000);

void BM_BlockUpdate(benchmark::State& state) {
  const Dataset d = make_data(1000, 100);
  FitState fit(d, Coefficients::zeros(d.p()));
  SolverConfig cfg;
  cfg.lambda = 5.0;
  cfg.alpha = 0.5;
  Index k = 0;
  for (auto _ : state) {
    block_update(fit, k, cfg);
    k = (k + 1) % d.p();
  }
}
BENCHMARK(BM_BlockUpdate);

void BM_CdCycle(benchmark::State& state) {
  const Dataset d = make_data(1000, state.range(0));
  SolverConfig cfg;
  cfg.lambda = 10.0;
  cfg.alpha = 0.5;
  cfg.max_cycles = 1;
  cfg.strong_set_size = static_cast<std::size_t>(d.p());
  for (auto _ : state) benchmark::DoNotOptimize(fit_cd(d, cfg).objective);
}
BENCHMARK(BM_CdCycle)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_BestSwap(benchmark::State& state) {
  const Dataset d = make_data(500, state.range(0), 0.9);
  SolverConfig cfg;
  cfg.lambda = 20.0;
  cfg.alpha = 0.5;
  const FitResult base = fit_cd(d, cfg);
  for (auto _ : state) {
    FitState fit(d, base.fit.coefficients());
    benchmark::DoNotOptimize(best_swap(fit, cfg).after);
  }
}
BENCHMARK(BM_BestSwap)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Path(benchmark::State& state) {
  const Dataset d = make_data(100, state.range(0));
  PathConfig cfg;
  cfg.alphas = {0.5};
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(d, cfg).size());
}
BENCHMARK(BM_Path)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
