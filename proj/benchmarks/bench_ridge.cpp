#include <benchmark/benchmark.h>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"
#include "rfsgd/ridge.hpp"

using namespace rfsgd;

namespace {

Dataset bench_data(Eigen::Index n, Eigen::Index D) {
  SyntheticSpec spec;
  spec.n = n;
  spec.D = D;
  spec.alpha = 1.0;
  spec.r = 0.5;
  spec.noise_sd = 0.3;
  spec.seed = 9;
  return generate_synthetic(spec);
}

// Dense n x n Gram assembly plus Cholesky solve.
void bm_krr(benchmark::State& state) {
  const Dataset data = bench_data(state.range(0), 16);
  for (auto _ : state) {
    RidgeSolution sol = krr_fit(data, FeatureKind::fourier_gaussian, 1.0, 1e-2);
    benchmark::DoNotOptimize(sol.coefficients.data());
  }
}

// M x M normal-equation solve on precomputed features.
void bm_rf_ridge(benchmark::State& state) {
  const Dataset data = bench_data(2048, 16);
  FeatureMapSpec fs;
  fs.kind = FeatureKind::fourier_gaussian;
  fs.M = state.range(0);
  fs.D = 16;
  fs.seed = 7;
  const FeatureMap fm = build(fs);
  for (auto _ : state) {
    RidgeSolution sol = rf_ridge_fit(data, fm, 1e-2);
    benchmark::DoNotOptimize(sol.coefficients.data());
  }
}

}  // namespace

BENCHMARK(bm_krr)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_rf_ridge)
    ->Arg(256)
    ->Arg(1024)
    ->Unit(benchmark::kMillisecond);
