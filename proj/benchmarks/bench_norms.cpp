// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/norms.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace minkgeo;

namespace {

NormPtr quartic(int dim, double lambda) {
  return std::make_shared<QuarticPerturbedNorm>(
      Mat(Mat::Identity(dim, dim)), QuarticPerturbedNorm::diagonal_quartic(dim), lambda);
}

NormPtr radial2() {
  NormPtr q = quartic(2, 0.12);
  std::vector<std::pair<Vec, double>> table;
  for (int k = 0; k < 512; ++k) {
    double t = 2.0 * std::numbers::pi * k / 512;
    Vec u(2);
    u << std::cos(t), std::sin(t);
    table.emplace_back(u, 1.0 / q->eval(u));
  }
  return std::make_shared<RadialSampledNorm>(2, std::move(table));
}

void BM_QuarticJet(benchmark::State& state) {
  NormPtr n = quartic(4, 0.08);
  auto rng = make_rng(1);
  Vec v = random_direction(rng, 4);
  double val;
  Vec grad;
  Mat hess;
  for (auto _ : state) {
    n->eval_sq_jet(v, val, grad, hess);
    benchmark::DoNotOptimize(val);
  }
}

void BM_LegendreInverse(benchmark::State& state) {
  NormPtr n = quartic(3, 0.1);
  auto rng = make_rng(2);
  Covector L = legendre(*n, Vec(random_direction(rng, 3) * 1.3));
  for (auto _ : state) {
    Vec v = legendre_inverse(*n, L);
    benchmark::DoNotOptimize(v);
  }
}

void BM_DualEvalRadial(benchmark::State& state) {
  NormPtr n = radial2();
  auto rng = make_rng(3);
  Covector L = random_direction(rng, 2) * 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(dual_eval(*n, L));
}

void BM_HessianSweep(benchmark::State& state) {
  NormPtr n = quartic(3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_eigenvalue_sweep(*n, state.range(0)));
}

}  // namespace

BENCHMARK(BM_QuarticJet);
BENCHMARK(BM_LegendreInverse);
BENCHMARK(BM_DualEvalRadial);
BENCHMARK(BM_HessianSweep)->Arg(360)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
