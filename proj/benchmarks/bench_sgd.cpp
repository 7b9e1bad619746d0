#include <benchmark/benchmark.h>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"
#include "rfsgd/sgd.hpp"

using namespace rfsgd;

namespace {

Dataset bench_data(Eigen::Index n, Eigen::Index D) {
  SyntheticSpec spec;
  spec.n = n;
  spec.D = D;
  spec.alpha = 1.0;
  spec.r = 0.5;
  spec.noise_sd = 0.3;
  spec.seed = 3;
  return generate_synthetic(spec);
}

// Mini-batch iteration throughput. precompute pays one feature-matrix pass up
// front; stream recomputes rows per draw and holds no n x M buffer.
void bm_train(benchmark::State& state, MemoryMode mode) {
  const Eigen::Index n = 2048, D = 32;
  const Dataset data = bench_data(n, D);
  FeatureMapSpec fs;
  fs.kind = FeatureKind::fourier_gaussian;
  fs.M = state.range(0);
  fs.D = D;
  fs.seed = 7;
  const FeatureMap fm = build(fs);
  SgdConfig cfg;
  cfg.b = 16;
  cfg.gamma = 0.05;
  cfg.T = 512;
  cfg.memory_mode = mode;
  cfg.sampling_seed = 5;
  for (auto _ : state) {
    Model m = train(data, fm, cfg);
    benchmark::DoNotOptimize(m.w.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.T);
}

void bm_batch_gd(benchmark::State& state) {
  const Eigen::Index n = 2048, D = 32;
  const Dataset data = bench_data(n, D);
  FeatureMapSpec fs;
  fs.kind = FeatureKind::fourier_gaussian;
  fs.M = state.range(0);
  fs.D = D;
  fs.seed = 7;
  const FeatureMap fm = build(fs);
  for (auto _ : state) {
    Model m = batch_gd(data, fm, 0.05, 0.0, 64);
    benchmark::DoNotOptimize(m.w.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}

}  // namespace

BENCHMARK_CAPTURE(bm_train, precompute, MemoryMode::precompute)
    ->Arg(64)
    ->Arg(256)
    ->Arg(1024);
BENCHMARK_CAPTURE(bm_train, stream, MemoryMode::stream)
    ->Arg(64)
    ->Arg(256)
    ->Arg(1024);
BENCHMARK(bm_batch_gd)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
