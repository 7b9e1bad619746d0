#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "rfsgd/features.hpp"
#include "rfsgd/rng.hpp"

using namespace rfsgd;

namespace {

Eigen::MatrixXd gaussian_rows(Eigen::Index n, Eigen::Index D,
                              std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, D);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) X(i, j) = rng.normal();
  }
  return X;
}

FeatureMapSpec spec_for(FeatureKind kind, Eigen::Index M, Eigen::Index D) {
  FeatureMapSpec spec;
  spec.kind = kind;
  spec.M = M;
  spec.D = D;
  spec.seed = 7;
  return spec;
}

// Parameter drawing; the per-feature sub-streams dominate, not the fill.
void bm_build(benchmark::State& state, FeatureKind kind) {
  const FeatureMapSpec spec = spec_for(kind, state.range(0), 32);
  for (auto _ : state) {
    FeatureMap fm = build(spec);
    benchmark::DoNotOptimize(fm.W.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Feature-matrix evaluation throughput in dataset rows per second.
void bm_map_matrix(benchmark::State& state, FeatureKind kind) {
  const Eigen::Index n = 2048, D = 32;
  const FeatureMap fm = build(spec_for(kind, state.range(0), D));
  const Eigen::MatrixXd X = gaussian_rows(n, D, 12345);
  for (auto _ : state) {
    Eigen::MatrixXd Phi = map_matrix(fm, X);
    benchmark::DoNotOptimize(Phi.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_CAPTURE(bm_build, fourier_gaussian, FeatureKind::fourier_gaussian)
    ->Arg(256)
    ->Arg(4096);
BENCHMARK_CAPTURE(bm_build, relu, FeatureKind::relu)->Arg(256)->Arg(4096);
BENCHMARK_CAPTURE(bm_build, linear_sketch, FeatureKind::linear_sketch)
    ->Arg(256)
    ->Arg(4096);

BENCHMARK_CAPTURE(bm_map_matrix, fourier_gaussian,
                  FeatureKind::fourier_gaussian)
    ->Arg(64)
    ->Arg(256)
    ->Arg(1024);
BENCHMARK_CAPTURE(bm_map_matrix, relu, FeatureKind::relu)
    ->Arg(64)
    ->Arg(256)
    ->Arg(1024);
BENCHMARK_CAPTURE(bm_map_matrix, linear_sketch, FeatureKind::linear_sketch)
    ->Arg(64)
    ->Arg(256)
    ->Arg(1024);

BENCHMARK_MAIN();
