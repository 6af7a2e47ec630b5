// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/norms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace minkgeo;

namespace {

NormPtr euclid(int dim) {
  return std::make_shared<QuadraticNorm>(Mat(Mat::Identity(dim, dim)));
}

NormPtr quartic(int dim, double lambda) {
  return std::make_shared<QuarticPerturbedNorm>(
      Mat(Mat::Identity(dim, dim)), QuarticPerturbedNorm::diagonal_quartic(dim), lambda);
}

NormPtr ellipse_radial(int n_samples = 256) {
  // radial table of the ellipse x^2/4 + y^2 = 1: R(theta) known in closed form
  std::vector<std::pair<Vec, double>> table;
  for (int k = 0; k < n_samples; ++k) {
    double t = 2.0 * std::numbers::pi * k / n_samples;
    Vec u(2);
    u << std::cos(t), std::sin(t);
    double r = 1.0 / std::sqrt(0.25 * u[0] * u[0] + u[1] * u[1]);
    table.emplace_back(u, r);
  }
  return std::make_shared<RadialSampledNorm>(2, std::move(table));
}

NormPtr quartic_ball_radial() {
  NormPtr q = quartic(2, 0.12);
  std::vector<std::pair<Vec, double>> table;
  for (int k = 0; k < 512; ++k) {
    double t = 2.0 * std::numbers::pi * k / 512;
    Vec u(2);
    u << std::cos(t), std::sin(t);
    table.emplace_back(u, 1.0 / q->eval(u));
  }
  RadialFitOptions opt;
  opt.holdout_target = 1e-8;
  return std::make_shared<RadialSampledNorm>(2, std::move(table), opt);
}

NormPtr ellipsoid4_radial() {
  Mat A = Mat::Identity(4, 4);
  A.diagonal() << 1.0, 1.44, 0.81, 1.21;
  QuadraticNorm q(A);
  std::vector<std::pair<Vec, double>> table;
  for (const Vec& u : direction_grid(4, 3000)) table.emplace_back(u, 1.0 / q.eval(u));
  return std::make_shared<RadialSampledNorm>(4, std::move(table));
}

// every family instance exercised by the property suites
std::vector<NormPtr> shipped_instances() {
  Mat A2(2, 2);
  A2 << 4.0, 0.0, 0.0, 1.0;
  Mat A2s(2, 2);
  A2s << 2.0, 0.5, 0.5, 1.0;
  std::vector<QuarticTerm> mixed = QuarticPerturbedNorm::diagonal_quartic(3);
  mixed.push_back({0.5, {2, 2, 0, 0}});
  return {
      euclid(2),
      euclid(3),
      euclid(4),
      std::make_shared<QuadraticNorm>(A2),
      std::make_shared<QuadraticNorm>(A2s),
      quartic(2, 0.1),
      quartic(3, 0.1),
      quartic(4, 0.08),
      std::make_shared<QuarticPerturbedNorm>(Mat(Mat::Identity(3, 3)), mixed, 0.05),
      ellipse_radial(),
      quartic_ball_radial(),
      ellipsoid4_radial(),
  };
}

// independent oracle: centered finite differences of (1/2) Phi^2
Covector legendre_fd(const MinkowskiNorm& norm, const Vec& v, double h) {
  Covector g(norm.dim());
  for (int i = 0; i < norm.dim(); ++i) {
    Vec vp = v, vm = v;
    vp[i] += h;
    vm[i] -= h;
    g[i] = (0.5 * norm.eval_sq(vp) - 0.5 * norm.eval_sq(vm)) / (2.0 * h);
  }
  return g;
}

// independent oracle: dual norm by dense sampling of <L, v> on the unit sphere
double dual_sampled(const MinkowskiNorm& norm, const Covector& L, int n = 20000) {
  double best = 0.0;
  for (const Vec& u : direction_grid(norm.dim(), n)) {
    double phi = norm.eval(u);
    best = std::max(best, L.dot(u) / phi);
  }
  return best;
}

}  // namespace

TEST_CASE("norm_eval examples") {
  Vec v(2);
  v << 3.0, 4.0;
  CHECK(euclid(2)->eval(v) == doctest::Approx(5.0).epsilon(1e-14));

  Vec v4(4);
  v4 << 1.0, 1.0, 0.0, 0.0;
  CHECK(quartic(4, 0.0)->eval(v4) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Vec e1(2);
  e1 << 1.0, 0.0;
  // Phi^2 = |v|^2 + 0.1 P(v)/|v|^2 at (1,0) equals 1.1
  CHECK(quartic(2, 0.1)->eval(e1) == doctest::Approx(std::sqrt(1.1)).epsilon(1e-14));

  CHECK(euclid(3)->eval(Vec(Vec::Zero(3))) == 0.0);
}

TEST_CASE("legendre examples and finite-difference oracle") {
  Vec v(2);
  v << 0.6, 0.8;
  Covector L = legendre(*euclid(2), v);
  CHECK((L - v).norm() < 1e-14);

  Mat A(2, 2);
  A << 4.0, 0.0, 0.0, 1.0;
  QuadraticNorm qa(A);
  Vec w(2);
  w << 0.5, 0.0;
  Covector Lw = legendre(qa, w);
  CHECK(Lw[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(Lw[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((Lw - legendre_fd(qa, w, 1e-5)).norm() < 1e-8);

  // if Phi(v) = 1 then <L, v> = 1 and Phi*(L) = 1
  for (const NormPtr& n : shipped_instances()) {
    auto rng = make_rng(7, n->dim());
    for (int k = 0; k < 20; ++k) {
      Vec u = random_direction(rng, n->dim());
      Vec unit = u / n->eval(u);
      Covector Lu = legendre(*n, unit);
      CHECK(std::abs(pair(Lu, unit) - 1.0) < 1e-10);
      CHECK(std::abs(dual_eval(*n, Lu) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("legendre matches centered differences at second order") {
  NormPtr n = quartic(3, 0.1);
  auto rng = make_rng(11);
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    Vec v = random_direction(rng, 3) * 1.3;
    Covector exact = legendre(*n, v);
    double e1 = (legendre_fd(*n, v, 2e-2) - exact).norm();
    double e2 = (legendre_fd(*n, v, 1e-2) - exact).norm();
    if (e1 > 1e-12) worst_ratio = std::min(worst_ratio, e1 / e2);
  }
  CHECK(worst_ratio >= 3.5);  // O(h^2): halving h cuts the error ~4x
}

TEST_CASE("half_hessian properties") {
  Mat A(2, 2);
  A << 2.0, 0.3, 0.3, 1.0;
  QuadraticNorm qa(A);
  Vec v(2);
  v << 0.4, -1.1;
  CHECK((half_hessian(qa, v) - A).cwiseAbs().maxCoeff() < 1e-14);

  for (const NormPtr& n : shipped_instances()) {
    auto rng = make_rng(13, n->dim());
    Vec u = random_direction(rng, n->dim());
    Mat H1 = half_hessian(*n, u);
    Mat H2 = half_hessian(*n, Vec(2.0 * u));
    CHECK((H1 - H2).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + H1.cwiseAbs().maxCoeff()));
  }

  // smallest eigenvalue positive on the 360-point sweep for every instance
  for (const NormPtr& n : shipped_instances()) CHECK(hessian_eigenvalue_sweep(*n, 360) > 0.0);
}

TEST_CASE("dual_eval examples against the sampling oracle") {
  Vec L(2);
  L << 3.0, 4.0;
  CHECK(dual_eval(*euclid(2), L) == doctest::Approx(5.0).epsilon(1e-12));

  Mat A(2, 2);
  A << 4.0, 0.0, 0.0, 1.0;
  QuadraticNorm qa(A);
  Vec L2(2);
  L2 << 2.0, 0.0;
  CHECK(dual_eval(qa, L2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dual_sampled(qa, L2) == doctest::Approx(1.0).epsilon(1e-6));

  NormPtr q = quartic(2, 0.1);
  auto rng = make_rng(17);
  for (int k = 0; k < 5; ++k) {
    Covector L3 = random_direction(rng, 2) * 1.7;
    CHECK(dual_eval(*q, L3) == doctest::Approx(dual_sampled(*q, L3)).epsilon(1e-6));
  }
}

TEST_CASE("legendre_inverse examples") {
  Vec L(2);
  L << 0.6, 0.8;
  CHECK((legendre_inverse(*euclid(2), L) - L).norm() < 1e-12);

  Mat A(2, 2);
  A << 4.0, 0.0, 0.0, 1.0;
  QuadraticNorm qa(A);
  Vec L2(2);
  L2 << 2.0, 0.0;
  Vec v = legendre_inverse(qa, L2);
  CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("legendre suite: norm preservation, involution, homogeneity") {
  auto instances = shipped_instances();
  std::size_t count = 0;
  for (std::size_t i = 0; count < 1000; i = (i + 1) % instances.size()) {
    const NormPtr& n = instances[i];
    auto rng = make_rng(1000 + count);
    Vec v = random_direction(rng, n->dim()) *
            std::exp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    Covector L = legendre(*n, v);
    // (iii) the Legendre transform preserves the norm
    CHECK(std::abs(dual_eval(*n, L) - n->eval(v)) < 1e-8);
    // (v) the inverse transform is the inverse map
    CHECK((legendre_inverse(*n, L) - v).norm() < 1e-8);
    // (i) positive homogeneity
    for (double t : {0.5, 2.0, 10.0})
      CHECK((legendre(*n, Vec(t * v)) - t * L).norm() < 1e-10 * std::max(1.0, t * L.norm()));
    ++count;
  }
}

TEST_CASE("zero vectors are rejected by derivative operations") {
  NormPtr n = euclid(2);
  Vec z = Vec::Zero(2);
  CHECK(n->eval(z) == 0.0);
  CHECK_THROWS_AS(legendre(*n, z), DomainError);
  CHECK_THROWS_AS(half_hessian(*n, z), DomainError);
  CHECK_THROWS_AS(legendre_inverse(*n, Covector(z)), DomainError);
  CHECK(dual_eval(*n, Covector(z)) == 0.0);
}

TEST_CASE("construction rejects invalid parameters") {
  Mat bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(QuadraticNorm{bad}, ConfigError);

  // lambda far past the convexity bound fails the eigenvalue sweep
  CHECK_THROWS_AS(QuarticPerturbedNorm(Mat(Mat::Identity(2, 2)),
                                       QuarticPerturbedNorm::diagonal_quartic(2), 50.0),
                  ConfigError);

  std::vector<std::pair<Vec, double>> tiny;
  Vec u(2);
  u << 1.0, 0.0;
  tiny.emplace_back(u, 1.0);
  CHECK_THROWS_AS(RadialSampledNorm(2, tiny), ConfigError);
}

TEST_CASE("radial_sampled reproduces closed forms and serializes") {
  // ellipse table vs the exact ellipse norm
  NormPtr r = ellipse_radial();
  Mat A(2, 2);
  A << 0.25, 0.0, 0.0, 1.0;
  QuadraticNorm exact(A);
  auto rng = make_rng(23);
  for (int k = 0; k < 100; ++k) {
    Vec v = random_direction(rng, 2) * 2.0;
    CHECK(std::abs(r->eval(v) - exact.eval(v)) < 1e-8 * exact.eval(v));
  }

  // 4D ellipsoid table: the Minkowski functional reproduces the ellipsoid
  NormPtr r4 = ellipsoid4_radial();
  Mat A4 = Mat::Identity(4, 4);
  A4.diagonal() << 1.0, 1.44, 0.81, 1.21;
  QuadraticNorm exact4(A4);
  for (int k = 0; k < 100; ++k) {
    Vec v = random_direction(rng, 4);
    CHECK(std::abs(r4->eval(v) - exact4.eval(v)) < 1e-8 * exact4.eval(v));
  }

  // central symmetry is exact by construction
  for (int k = 0; k < 50; ++k) {
    Vec v = random_direction(rng, 2) * 1.5;
    CHECK(r->eval(v) == r->eval(Vec(-v)));
  }

  // JSON round trip preserves evaluation
  NormPtr back = norm_from_json(norm_to_json(*r));
  for (int k = 0; k < 50; ++k) {
    Vec v = random_direction(rng, 2);
    CHECK(back->eval(v) == doctest::Approx(r->eval(v)).epsilon(1e-12));
  }
}

TEST_CASE("norm JSON round trips for every family") {
  for (const NormPtr& n : shipped_instances()) {
    NormPtr back = norm_from_json(norm_to_json(*n));
    CHECK(back->dim() == n->dim());
    CHECK(back->family() == n->family());
    auto rng = make_rng(31, n->dim());
    for (int k = 0; k < 10; ++k) {
      Vec v = random_direction(rng, n->dim()) * 1.4;
      CHECK(back->eval(v) == doctest::Approx(n->eval(v)).epsilon(1e-10));
    }
  }
}

TEST_CASE("pullback norm chains derivatives through the map") {
  Mat A(3, 2);
  A << 1.0, 0.2, 0.0, 1.5, 0.3, 0.0;
  PullbackNorm pulled(quartic(3, 0.1), A);
  auto rng = make_rng(37);
  Vec v = random_direction(rng, 2);
  CHECK(pulled.eval(v) == doctest::Approx(quartic(3, 0.1)->eval(A * v)).epsilon(1e-14));
  Covector L = legendre(pulled, v);
  CHECK((L - legendre_fd(pulled, v, 1e-6)).norm() < 1e-7);
  CHECK((legendre_inverse(pulled, L) - v).norm() < 1e-9);
}
