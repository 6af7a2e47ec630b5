// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/embedding.hpp"

#include <benchmark/benchmark.h>

using namespace minkgeo;

namespace {

void BM_BlendedGaugeValue(benchmark::State& state) {
  auto source = std::make_shared<QuadraticNorm>(Mat(Mat::Identity(2, 2)));
  BlendedGauge gauge(source, 0.05);
  auto rng = make_rng(7);
  Vec p = random_direction(rng, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gauge.value(p));
}

void BM_PreconvexityVerify(benchmark::State& state) {
  auto source = std::make_shared<QuadraticNorm>(Mat(Mat::Identity(2, 2)));
  PreconvexityOptions opt;
  opt.n_fiber = 32;
  opt.n_dirs = 64;
  opt.n_xy = 5;
  for (auto _ : state)
    benchmark::DoNotOptimize(preconvexity_verify(*source, 0.05, 1e-4, opt));
}

void BM_EmbedEuclidean(benchmark::State& state) {
  auto source = std::make_shared<QuadraticNorm>(Mat(Mat::Identity(2, 2)));
  for (auto _ : state) {
    EmbeddingArtifact art = embed_constant(*source);
    benchmark::DoNotOptimize(art.isometry_error);
  }
}

}  // namespace

BENCHMARK(BM_BlendedGaugeValue);
BENCHMARK(BM_PreconvexityVerify)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmbedEuclidean)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
