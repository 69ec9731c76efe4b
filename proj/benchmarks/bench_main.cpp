#include <benchmark/benchmark.h>

#include "hvinfer/factors.hpp"
#include "hvinfer/lasso.hpp"
#include "hvinfer/lava.hpp"
#include "hvinfer/pipeline.hpp"
#include "hvinfer/simulation.hpp"

using namespace hvinfer;

namespace {

DgpInstance instance(Index p, Index m) {
  DgpConfig cfg;
  cfg.n = 200;
  cfg.p = p;
  cfg.m = m;
  cfg.s_m = std::min<Index>(10, m);
  cfg.seed = 7;
  return generate_dgp(cfg);
}

void BM_LassoGram(benchmark::State& state) {
  const auto inst = instance(state.range(0), 1);
  const Matrix& x = inst.data.x();
  const double n = static_cast<double>(x.rows());
  const Matrix gram = x.transpose() * x / n;
  const Vector corr = x.transpose() * inst.data.y().col(0) / n;
  const double lambda = 0.1 * lasso_lambda_max(x, inst.data.y().col(0));
  for (auto _ : state) benchmark::DoNotOptimize(lasso_gram(gram, corr, lambda).coef.data());
}
BENCHMARK(BM_LassoGram)->Arg(50)->Arg(250)->Unit(benchmark::kMicrosecond);

void BM_RidgeProjectors(benchmark::State& state) {
  const auto inst = instance(state.range(0), 1);
  for (auto _ : state) {
    RidgeProjectors proj(inst.data.x(), 1.0);
    benchmark::DoNotOptimize(proj.p_mat().data());
  }
}
BENCHMARK(BM_RidgeProjectors)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_LavaFitAll(benchmark::State& state) {
  const auto inst = instance(state.range(0), 20);
  const auto tuning = default_lava_tuning(inst.data);
  for (auto _ : state) benchmark::DoNotOptimize(lava_fit_all(inst.data, tuning).f_hat.data());
}
BENCHMARK(BM_LavaFitAll)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_EstimateFactors(benchmark::State& state) {
  const auto inst = instance(50, state.range(0));
  const auto lava = lava_fit_all(inst.data, default_lava_tuning(inst.data));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_factors(lava.residuals, {}).b_hat.data());
}
BENCHMARK(BM_EstimateFactors)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_PipelineAllEntries(benchmark::State& state) {
  const auto inst = instance(state.range(0), 20);
  PipelineConfig cfg;
  cfg.tuning = state.range(1) ? TuningMode::CrossValidation : TuningMode::Default;
  cfg.k = 3;
  for (auto _ : state) {
    const auto hs = fit_hidden_structure(inst.data, cfg);
    ThetaInferenceEngine engine(inst.data, hs.factors, cfg);
    engine.prepare_all();
    benchmark::DoNotOptimize(engine.infer(0, 0).u_stat);
  }
}
BENCHMARK(BM_PipelineAllEntries)
    ->Args({50, 0})
    ->Args({50, 1})
    ->Args({250, 0})
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
