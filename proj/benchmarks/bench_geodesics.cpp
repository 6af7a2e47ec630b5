// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/geodesics.hpp"

#include <benchmark/benchmark.h>

using namespace minkgeo;

namespace {

ImmersedSurface sphere_surface() {
  ImmersedSurface s;
  s.ambient = std::make_shared<QuadraticNorm>(Mat(Mat::Identity(3, 3)));
  s.chart = std::make_shared<SphereChart>(1.0);
  s.domain = {-10.0, 10.0, -1.45, 1.45};
  return s;
}

void BM_ShootUnitLength(benchmark::State& state) {
  ImmersedSurface s = sphere_surface();
  double dt = 1.0 / state.range(0);
  for (auto _ : state) {
    GeodesicPath p = shoot(s, Vec2(0, 0), Vec2(0.8, 0.6), 1.0, dt);
    benchmark::DoNotOptimize(p.samples.back().c);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PolylineLength(benchmark::State& state) {
  ImmersedSurface s = sphere_surface();
  std::vector<Vec2> poly;
  for (int i = 0; i <= 32; ++i) poly.emplace_back(0.03 * i, 0.01 * (i % 5));
  for (auto _ : state) benchmark::DoNotOptimize(length(s, poly));
}

}  // namespace

BENCHMARK(BM_ShootUnitLength)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolylineLength)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
