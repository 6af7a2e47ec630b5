// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Exit status is the number of failed criteria.

#include "minkgeo/calibrator.hpp"
#include "minkgeo/convexgeom.hpp"
#include "minkgeo/embedding.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

using namespace minkgeo;

namespace {

NormPtr euclid(int dim) {
  return std::make_shared<QuadraticNorm>(Mat(Mat::Identity(dim, dim)));
}

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

NormPtr radial4() {
  Mat A = Mat::Identity(4, 4);
  A.diagonal() << 1.0, 1.3, 0.8, 1.1;
  QuadraticNorm q(A);
  std::vector<std::pair<Vec, double>> table;
  for (const Vec& u : direction_grid(4, 3000)) table.emplace_back(u, 1.0 / q.eval(u));
  return std::make_shared<RadialSampledNorm>(4, std::move(table));
}

ImmersedSurface make_surface(NormPtr ambient, ChartPtr chart, double extent) {
  ImmersedSurface s;
  s.ambient = std::move(ambient);
  s.chart = std::move(chart);
  s.domain = {-extent, extent, -extent, extent};
  return s;
}

std::shared_ptr<PolynomialChart> random_graph_chart(std::mt19937_64& rng, int ambient_dim) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<std::vector<ChartMonomial>> comps(ambient_dim);
  comps[0] = {{1.0, 1, 0}};
  comps[1] = {{1.0, 0, 1}};
  for (int c = 2; c < ambient_dim; ++c)
    comps[c] = {{u(rng), 2, 0}, {u(rng), 1, 1}, {u(rng), 0, 2},
                {0.4 * u(rng), 3, 0}, {0.4 * u(rng), 2, 1}, {0.4 * u(rng), 0, 3}};
  return std::make_shared<PolynomialChart>(std::move(comps));
}

struct Criterion {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok) { pass = pass && ok; }
};

// 1. Legendre suite across the three families, 1e-8, under 10 s
Criterion criterion_legendre() {
  Criterion c;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<NormPtr> instances = {euclid(2), euclid(3),      euclid(4),
                                    quartic(2, 0.1), quartic(3, 0.1), quartic(4, 0.08),
                                    radial2(),  radial4()};
  double dual_err = 0.0, inv_err = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; count < 1000; i = (i + 1) % instances.size(), ++count) {
    const NormPtr& n = instances[i];
    auto rng = make_rng(0xACC1, count);
    Vec v = random_direction(rng, n->dim()) *
            std::exp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    Covector L = legendre(*n, v);
    dual_err = std::max(dual_err, std::abs(dual_eval(*n, L) - n->eval(v)));
    inv_err = std::max(inv_err, (legendre_inverse(*n, L) - v).norm());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(dual_err < 1e-8);
  c.require(inv_err < 1e-8);
  c.require(secs < 10.0);
  c.detail << "1000 pairs, |Phi*(Lv)-Phi(v)| max " << dual_err << ", roundtrip max "
           << inv_err << ", " << secs << " s";
  return c;
}

// 2. closed-form saddle verdicts vs 720-direction sweeps; the sigma = 0
// chart's pencil quadratic at the origin
Criterion criterion_classifier() {
  Criterion c;
  auto rng = make_rng(0xACC2);
  std::uniform_real_distribution<double> upos(-0.8, 0.8);
  int compared = 0, agreed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int dim = trial % 2 == 0 ? 3 : 4;
    NormPtr amb = trial % 3 == 0 ? quartic(dim, 0.07) : euclid(dim);
    ImmersedSurface s = make_surface(amb, random_graph_chart(rng, dim), 1.0);
    Vec2 x(upos(rng), upos(rng));
    Vec2 q(std::cos(3.0 * upos(rng)), std::sin(3.0 * upos(rng)));
    std::vector<Mat2> pencil;
    try {
      pencil = second_fundamental_pencil(s, x, q);
    } catch (const DomainError&) {
      continue;  // rank-deficient random chart: not a comparison point
    }
    double min_abs_det = std::abs(pencil[0].determinant());
    if (pencil.size() == 2)
      min_abs_det = std::min(min_abs_det, std::abs(pencil[1].determinant()));
    if (min_abs_det <= 1e-9) continue;
    ++compared;
    if (classify_pencil(pencil) == saddle_classify_sweep(pencil, 720)) ++agreed;
  }
  c.require(compared > 700);
  c.require(agreed == compared);

  ImmersedSurface f0 = make_surface(euclid(4), std::make_shared<SaddleQuarticChart>(0.0), 0.3);
  SaddleVerdict v = saddle_classify(f0, Vec2(0, 0), Vec2(1, 0));
  c.require(v.cls == SaddleClass::strictly_saddle);
  c.require(std::abs(v.detA + 4.0) < 1e-12);  // pencil quadratic -4a^2 - b^2
  c.require(std::abs(v.detB + 1.0) < 1e-12);
  c.require(std::abs(v.mixed) < 1e-12);
  c.detail << agreed << "/" << compared << " sweep agreements; origin pencil ("
           << v.detA << ", " << v.mixed << ", " << v.detB << ") strictly saddle";
  return c;
}

// 3. great-circle oracle, unit-speed drift, RK4 order
Criterion criterion_integrator() {
  Criterion c;
  ImmersedSurface sphere = make_surface(euclid(3), std::make_shared<SphereChart>(1.0), 1.0);
  sphere.domain = {-10.0, 10.0, -1.45, 1.45};
  const double alpha = 0.6;
  GeodesicPath path = shoot(sphere, Vec2(0, 0), Vec2(std::cos(alpha), std::sin(alpha)), 1.0,
                            1e-3);
  Vec p0(3), w(3);
  p0 << 1, 0, 0;
  w << 0, std::cos(alpha), std::sin(alpha);
  double pos_err = 0.0;
  for (const auto& s : path.samples) {
    Vec exact = std::cos(s.t) * p0 + std::sin(s.t) * w;
    pos_err = std::max(pos_err, (sphere.jet(s.c).value - exact).norm());
  }
  double drift1 = shoot(sphere, Vec2(0, 0), Vec2(std::cos(alpha), std::sin(alpha)), 2.0, 1e-3)
                      .max_speed_residual();
  double drift2 = shoot(sphere, Vec2(0, 0), Vec2(std::cos(alpha), std::sin(alpha)), 2.0, 2e-3)
                      .max_speed_residual();
  c.require(pos_err < 1e-6);
  c.require(drift1 < 1e-7);
  c.require(drift2 / std::max(drift1, 1e-300) >= 8.0);
  c.detail << "great-circle err " << pos_err << ", drift " << drift1 << ", halving ratio "
           << drift2 / std::max(drift1, 1e-300);
  return c;
}

// 4. the calibrator instance on the saddle chart with sigma from the search
Criterion criterion_calibrator() {
  Criterion c;
  auto t0 = std::chrono::steady_clock::now();
  SigmaSearchResult search = sigma_search(*euclid(2));
  c.require(search.found);
  ImmersedSurface s = make_surface(
      euclid(4), std::make_shared<SaddleQuarticChart>(search.sigma), 0.2);
  CalibratorOptions opt;
  opt.n_t = 33;
  opt.n_s = 10;
  CalibratorField field =
      make_calibrator(s, Vec2(-0.04, -0.01), Vec2(1.0, 0.25), 0.1, 1e-3, opt);
  RhoReport rho = field.verify_rho();
  CalibrationReport cal = field.calibrate_correct();
  Vec2 ca, va;
  field.path().state_at(field.a(), ca, va);
  GeodesicPath interior = shoot(s, ca, va, 0.1, 1e-3);
  CompetitorOptions copt;
  copt.multistarts = 64;
  CompetitorResult comp = competitor_search(s, interior, field.s_max(), 33, copt);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(rho.rho_s_max < 1e-4);
  c.require(rho.rho_ss_min > -1e-4);
  c.require(cal.certified && cal.phi_star_dg_max <= 1.0 + 1e-9);
  c.require(comp.gain() <= 1e-6);
  c.require(secs < 180.0);
  c.detail << "sigma " << search.sigma << ", max|rho'_s| " << rho.rho_s_max
           << ", min rho''_ss " << rho.rho_ss_min << ", witness " << cal.sigma_witness
           << ", competitor gap " << comp.gain() << ", " << secs << " s";
  return c;
}

// 5. the embedding pipeline end-to-end, Euclidean and positively curved
Criterion criterion_embedding() {
  Criterion c;
  auto check_artifact = [&](const EmbeddingArtifact& a, const char* name, double secs) {
    c.require(a.preconvexity.passed && a.preconvexity.c_est > 0.0);
    c.require(a.convexity_min_eig > 0.0);
    c.require(a.isometry_error < 1e-6);
    c.require(a.all_strictly_saddle);
    c.require(a.certified);
    c.require(secs < 300.0);
    c.detail << name << ": c_est " << a.preconvexity.c_est << ", sweep min "
             << a.convexity_min_eig << ", isometry " << a.isometry_error << ", " << secs
             << " s; ";
  };
  auto t0 = std::chrono::steady_clock::now();
  EmbeddingArtifact flat = embed_constant(*euclid(2));
  double s1 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  check_artifact(flat, "euclidean", s1);

  auto t1 = std::chrono::steady_clock::now();
  RoundSphereMetric metric(1.0, Vec2(0.3, 0.2));
  BlowupResult blow = blowup_reduce(metric);
  double s2 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  check_artifact(blow.artifact, "riemannian", s2);
  c.require(blow.converged);
  c.require(blow.final_isometry_error < 1e-6);
  c.detail << "blow-up converged, final deviation " << blow.final_isometry_error;
  return c;
}

// 6. cone shortcuts with the first-variation limit, the refutation, and
// perimeter monotonicity
Criterion criterion_convex() {
  Criterion c;
  NormPtr n3 = quartic(3, 0.08);
  auto rng = make_rng(0xACC6);
  double min_margin = std::numeric_limits<double>::infinity();
  double max_limit_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    TrihedralCone cone = random_sharp_trihedral(rng);
    Vec3 p, q;
    random_face_points(cone, rng, p, q);
    ConeShortcutResult res = cone_shortcut(*n3, cone, p, q);
    min_margin = std::min(min_margin, res.margin);
    Vec3 v = cone_outward_vector(cone), v1, v2;
    cone_edge_velocities(cone, p, q, v1, v2);
    auto nn = [&](const Vec3& x) { return n3->eval(Vec(x)); };
    double rhs = nn(v - v1) + nn(v - v2) - nn(v1 - v2);
    double ap = cone.nu3.dot(p), aq = cone.nu3.dot(q), beta = -cone.nu3.dot(v);
    auto fg = [&](double t) {
      Vec3 a = p + (ap / (ap + t * beta)) * (t * v - p);
      Vec3 b = q + (aq / (aq + t * beta)) * (t * v - q);
      return (nn(p - t * v) + nn(q - t * v) - nn(p - a) - nn(a - b) - nn(b - q)) / t;
    };
    double h = 1e-4 * std::max(p.norm(), q.norm());
    max_limit_err = std::max(max_limit_err, std::abs(2.0 * fg(h) - fg(2.0 * h) - rhs));
  }
  c.require(min_margin > 0.0);
  c.require(max_limit_err < 1e-4);

  ConvexScene scene;
  scene.norm3 = n3;
  scene.body = std::make_shared<CappedConeBody>(1.0);
  RefuteReport rep = geodesic_line_refute(scene);
  c.require(rep.refuted && rep.refuting_lambda <= 256.0);

  auto prng = make_rng(0xACC7);
  std::uniform_real_distribution<double> jitter(0.05, 0.95);
  std::uniform_real_distribution<double> shrink(0.25, 0.85);
  std::uniform_real_distribution<double> radial(0.3, 1.0);
  auto convex_hull = [](std::vector<Vec2> pts) {
    std::vector<Vec2> hull;
    std::size_t start = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i][0] < pts[start][0]) start = i;
    std::size_t cur = start;
    do {
      hull.push_back(pts[cur]);
      std::size_t next = (cur + 1) % pts.size();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        Vec2 a = pts[next] - pts[cur], b = pts[i] - pts[cur];
        if (a[0] * b[1] - a[1] * b[0] < 0.0) next = i;
      }
      cur = next;
    } while (cur != start && hull.size() <= pts.size());
    return hull;
  };
  double worst_violation = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int nv = 5 + trial % 6;
    std::vector<Vec2> raw;
    for (int i = 0; i < nv; ++i) {
      double a = 2.0 * std::numbers::pi * (i + jitter(prng)) / nv;
      raw.emplace_back(radial(prng) * std::cos(a), radial(prng) * std::sin(a));
    }
    std::vector<Vec2> outer = convex_hull(raw);
    if (outer.size() < 3) continue;
    std::vector<Vec2> inner;
    double sfac = shrink(prng);
    for (const Vec2& p : outer) inner.push_back(sfac * p);
    NormPtr norm = trial % 2 == 0 ? euclid(2) : quartic(2, 0.1);
    MonotonicityReport mono = perimeter_monotonicity_check(inner, outer, *norm);
    worst_violation = std::max(
        worst_violation,
        std::max(mono.inner_perimeter - mono.outer_perimeter, mono.max_cut_increase));
  }
  c.require(worst_violation <= 1e-10);
  c.detail << "cone margin min " << min_margin << ", limit err max " << max_limit_err
           << ", refuted at lambda " << rep.refuting_lambda << " (len "
           << rep.competitor_length << "), perimeter violation max " << worst_violation;
  return c;
}

// 7. negative controls on a convex chart: the suite detects non-saddle input
Criterion criterion_negative_controls() {
  Criterion c;
  ImmersedSurface bowl =
      make_surface(euclid(3), PolynomialChart::quadratic_graph(1.0, 0.0, 1.0), 3.0);
  CalibratorOptions opt;
  opt.n_t = 21;
  opt.n_s = 10;
  CalibratorField field =
      make_calibrator(bowl, Vec2(-0.5, 0.0), Vec2(1.0, 0.0), 1.0, 1e-3, opt);
  RhoReport rho = field.verify_rho();
  c.require(rho.rho_ss_min < 0.0);

  GeodesicPath past_conjugate = shoot(bowl, Vec2(-1.0, 0.0), Vec2(1.0, 0.0), 3.2, 1e-3);
  CompetitorOptions copt;
  copt.multistarts = 64;
  CompetitorResult comp = competitor_search(bowl, past_conjugate, 0.3, 33, copt);
  c.require(comp.gain() > 1e-6);
  c.detail << "min rho''_ss " << rho.rho_ss_min << " < 0, competitor gain " << comp.gain();
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> criteria = {
      {"legendre suite", criterion_legendre},
      {"saddle classifier vs brute-force sweep", criterion_classifier},
      {"geodesic integrator oracles", criterion_integrator},
      {"calibrated geodesic on the saddle chart", criterion_calibrator},
      {"saddle embedding pipeline", criterion_embedding},
      {"cone shortcuts, refutation, perimeters", criterion_convex},
      {"negative controls on a convex chart", criterion_negative_controls},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Criterion result;
    try {
      result = criteria[i].run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail << "exception: " << e.what();
    }
    if (!result.pass) ++failures;
    std::printf("[%s] %zu. %s: %s\n", result.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, result.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures;
}
