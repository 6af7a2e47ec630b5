// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/embedding.hpp"

#include "minkgeo/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>
#include <sstream>

namespace minkgeo {

using nlohmann::json;

// ----------------------- parallelogram normalization -----------------------

namespace {

// boundary point of the unit ball in support direction u
Vec2 support_point(const MinkowskiNorm& norm, const Vec2& u) {
  Vec w = legendre_inverse(norm, Vec(u));
  return Vec2(w[0], w[1]) / norm.eval(w);
}

}  // namespace

ParallelogramResult parallelogram_normalize(const MinkowskiNorm& norm2d) {
  if (norm2d.dim() != 2) throw ConfigError("parallelogram_normalize: need a 2D norm");
  auto support = [&](double theta) {
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    return dual_eval(norm2d, u);
  };
  auto area = [&](double t1, double t2) {
    double s = std::abs(std::sin(t2 - t1));
    if (s < 1e-6) return std::numeric_limits<double>::infinity();
    return 4.0 * support(t1) * support(t2) / s;
  };

  const double deg = std::numbers::pi / 180.0;
  double best_a = std::numeric_limits<double>::infinity();
  double b1 = 0.0, b2 = 0.5 * std::numbers::pi;
  for (int i = 0; i < 180; ++i) {
    for (int j = i + 1; j < i + 180; ++j) {
      double a = area(i * deg, j * deg);
      if (a < best_a - 1e-13) {
        best_a = a;
        b1 = i * deg;
        b2 = j * deg;
      }
    }
  }
  // golden-section refinement, alternating the two angles
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto golden = [&](double lo, double hi, const std::function<double(double)>& f) {
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = f(d);
      }
    }
    return 0.5 * (lo + hi);
  };
  for (int round = 0; round < 3; ++round) {
    double r1 = golden(b1 - 1.5 * deg, b1 + 1.5 * deg,
                       [&](double t) { return area(t, b2); });
    if (area(r1, b2) < area(b1, b2)) b1 = r1;
    double r2 = golden(b2 - 1.5 * deg, b2 + 1.5 * deg,
                       [&](double t) { return area(b1, t); });
    if (area(b1, r2) < area(b1, b2)) b2 = r2;
  }

  ParallelogramResult out;
  out.angle1 = b1;
  out.angle2 = b2;
  out.area = area(b1, b2);
  Vec2 u1(std::cos(b1), std::sin(b1)), u2(std::cos(b2), std::sin(b2));
  double h1 = support(b1), h2 = support(b2);
  out.transform.row(0) = u1.transpose() / h1;
  out.transform.row(1) = u2.transpose() / h2;
  Vec2 p1 = out.transform * support_point(norm2d, u1);
  Vec2 p2 = out.transform * support_point(norm2d, u2);
  out.midpoint_residual =
      std::max((p1 - Vec2(1, 0)).norm(), (p2 - Vec2(0, 1)).norm());
  return out;
}

// ------------------------------- tangent lift -------------------------------

Eigen::Matrix4d tangent_lift_jacobian(double x, double y, double xi, double eta) {
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J(0, 2) = 1.0;
  J(1, 3) = 1.0;
  J.row(2) << xi, -eta, x, -y;
  J.row(3) << eta, xi, y, x;
  return J;
}

double tangent_lift_det(double xi, double eta) { return xi * xi + eta * eta; }

// ----------------------------- support constants -----------------------------

SupportEstimate estimate_support_constants(const MinkowskiNorm& norm2d, int n_samples) {
  SupportEstimate est;
  est.a0 = std::numeric_limits<double>::infinity();
  est.c0 = std::numeric_limits<double>::infinity();
  std::vector<Vec2> pts(n_samples);
  std::vector<Vec2> sups(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    double theta = 2.0 * std::numbers::pi * k / n_samples;
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    Vec v = legendre_inverse(norm2d, u);
    double phi = norm2d.eval(v);
    pts[k] = Vec2(v[0], v[1]) / phi;
    Covector L = legendre(norm2d, Vec(pts[k]));
    sups[k] = Vec2(L[0], L[1]);
    double a = std::abs(pts[k][0]) >= std::abs(pts[k][1]) ? std::abs(L[0]) : std::abs(L[1]);
    est.a0 = std::min(est.a0, a);
  }
  for (int k = 0; k < n_samples; ++k) {
    for (int l = 0; l < n_samples; ++l) {
      double d2 = (pts[l] - pts[k]).squaredNorm();
      if (d2 < 1e-16) continue;
      est.c0 = std::min(est.c0, (1.0 - sups[k].dot(pts[l])) / d2);
    }
  }
  return est;
}

// ------------------------------- pre-convexity -------------------------------

PreconvexityReport preconvexity_verify(const MinkowskiNorm& norm2d, double sigma,
                                       double u_radius, const PreconvexityOptions& opt) {
  if (norm2d.dim() != 2) throw ConfigError("preconvexity_verify: need a 2D norm");
  PreconvexityReport report;
  report.sigma = sigma;
  report.u_radius = u_radius;
  SaddleQuarticChart chart(sigma);

  std::vector<Vec2> dirs(opt.n_dirs);
  std::vector<Vec2> sup_at(opt.n_dirs);
  for (int k = 0; k < opt.n_dirs; ++k) {
    double theta = 2.0 * std::numbers::pi * k / opt.n_dirs;
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    Vec v = legendre_inverse(norm2d, u);
    dirs[k] = Vec2(v[0], v[1]) / norm2d.eval(v);
    Covector L = legendre(norm2d, Vec(dirs[k]));
    sup_at[k] = Vec2(L[0], L[1]);
  }
  std::vector<Vec2> cell;
  cell.emplace_back(0.0, 0.0);
  for (int i = 0; i < opt.n_xy; ++i)
    for (int j = 0; j < opt.n_xy; ++j) {
      Vec2 p(-u_radius + 2.0 * u_radius * i / (opt.n_xy - 1.0),
             -u_radius + 2.0 * u_radius * j / (opt.n_xy - 1.0));
      if (p.squaredNorm() <= u_radius * u_radius && p.squaredNorm() > 0.0)
        cell.push_back(p);
    }

  std::vector<double> c_min(opt.n_fiber, std::numeric_limits<double>::infinity());
  std::vector<double> viol(opt.n_fiber, 0.0);
  const int stride = std::max(1, opt.n_dirs / opt.n_fiber);
  parallel_for(static_cast<std::size_t>(opt.n_fiber), [&](std::size_t f) {
    int k0 = static_cast<int>(f) * stride % opt.n_dirs;
    const Vec2& v0 = dirs[k0];
    const Vec2& L0 = sup_at[k0];
    for (const Vec2& xy : cell) {
      Mat2 A = chart.planar_defect(xy[0], xy[1]);
      for (int k = 0; k < opt.n_dirs; ++k) {
        const Vec2& v = dirs[k];
        // 1 - L0(df v) split into the planar support gap and the defect
        // term; the patch radius can be so small that the combined form
        // would drown in rounding. At v = v0 the support gap is identically
        // zero (L0 v0 = Phi^2(v0) = 1), so the identity replaces the
        // cancellation-prone subtraction.
        double support_gap = k == k0 ? 0.0 : 1.0 - L0.dot(v);
        double deficit = support_gap + L0.dot(A * v);
        double d2 = xy.squaredNorm() + (v - v0).squaredNorm();
        viol[f] = std::max(viol[f], -deficit);
        if (d2 < 1e-18) continue;
        c_min[f] = std::min(c_min[f], deficit / d2);
      }
    }
  });
  report.c_est = *std::min_element(c_min.begin(), c_min.end());
  report.max_violation = std::max(0.0, *std::max_element(viol.begin(), viol.end()));
  report.passed = report.c_est > 0.0 && report.max_violation <= 1e-12;
  return report;
}

SigmaSearchResult sigma_search(const MinkowskiNorm& norm2d, const PreconvexityOptions& opt) {
  SigmaSearchResult out;
  out.support = estimate_support_constants(norm2d);
  const double a0 = out.support.a0;
  const double c0 = out.support.c0;
  const double c1 = a0 / 18.0;
  const double c2 = a0 / 3.0;
  const double c3 = c0 * c1 * c1 / 100.0;
  double sigma = std::min(1.0 / (c2 * c2), 0.1) / 2.0;
  while (sigma >= 1e-6) {
    double u_radius = 0.99 * std::sqrt(c3 * sigma / 10.0);
    PreconvexityReport rep = preconvexity_verify(norm2d, sigma, u_radius, opt);
    if (rep.passed) {
      out.found = true;
      out.sigma = sigma;
      out.u_radius = u_radius;
      out.report = rep;
      return out;
    }
    sigma *= 0.5;
    ++out.bisections;
  }
  return out;
}

// -------------------------------- BlendedGauge --------------------------------

namespace {

inline double blend_chi(double tau) {
  double o = 1.0 - tau;
  double o2 = o * o;
  return o2 * o2 * (1.0 + tau * (4.0 + 10.0 * tau));
}

}  // namespace

BlendedGauge::BlendedGauge(NormPtr source2d, double sigma)
    : source_(std::move(source2d)), chart_(sigma), sigma_(sigma) {
  if (source_->dim() != 2) throw ConfigError("blended gauge: need a 2D source norm");
  far_quad_ = Mat2::Zero();
  const int K = 8;
  for (int k = 0; k < K; ++k) {
    double theta = std::numbers::pi * (k + 0.37) / K;
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    far_quad_ += Mat2(half_hessian(*source_, u)) / K;
  }
  double mean = 0.0;
  const int M = 128;
  for (int k = 0; k < M; ++k) {
    double theta = 2.0 * std::numbers::pi * k / M;
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    Vec v = legendre_inverse(*source_, u);
    Vec2 vb = Vec2(v[0], v[1]) / source_->eval(v);
    mean += band_quadratic(vb).trace() / (2.0 * M);
  }
  kappa_ = mean > 1e-12 ? mean : 0.25;
}

Mat2 BlendedGauge::band_quadratic(const Vec2& v) const {
  Covector L = legendre(*source_, Vec(v));
  const double a = L[0], b = L[1];
  const double xi = v[0], eta = v[1];
  const double alpha = 3.0 * sigma_ + 3.0 * sigma_ * sigma_;
  const double beta = sigma_ * sigma_;
  Mat2 W;
  W(0, 0) = 2.0 * (a * xi * alpha + b * eta * beta);
  W(1, 1) = 2.0 * (a * xi * beta + b * eta * alpha);
  W(0, 1) = W(1, 0) = 2.0 * beta * (a * eta + b * xi);
  Mat2 M;
  M << 2.0 * xi, -2.0 * eta, eta, xi;
  Mat2 Minv = M.inverse();
  return Minv.transpose() * W * Minv;
}

double BlendedGauge::band_curvature_min(int n_samples) const {
  double min_eig = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_samples; ++k) {
    double theta = 2.0 * std::numbers::pi * k / n_samples;
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    Vec v = legendre_inverse(*source_, u);
    Vec2 vb = Vec2(v[0], v[1]) / source_->eval(v);
    Eigen::SelfAdjointEigenSolver<Mat2> eig(band_quadratic(vb));
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
  }
  return min_eig;
}

double BlendedGauge::value(const Vec& p) const {
  if (p.size() != 4) throw DomainError("blended gauge: need a 4-vector");
  const Vec2 w(p[0], p[1]);
  const Vec2 z(p[2], p[3]);
  const double ps = p.squaredNorm();
  if (ps == 0.0) return 0.0;
  const double tau = z.squaredNorm() / ps;
  // fiber term: kappa |z|^2 with kappa the patch's mean fiber curvature, so
  // the ellipsoid osculates the band. The patch radius is so small
  // (u_radius << sigma) that the radial gap this leaves on the patch,
  // ~kappa u_radius^2, sits far below the containment tolerance, while the
  // term keeps the band strictly convex.
  const double fiber = kappa_ * z.squaredNorm();
  const double far_w = w.dot(far_quad_ * w);
  if (1.0 - tau < 1e-9) return far_w + fiber;  // chi vanishes at the pole
  const double chi = blend_chi(tau);
  Vec wv(2);
  wv << w[0], w[1];
  return chi * source_->eval_sq(wv) + (1.0 - chi) * far_w + fiber;
}

// --------------------------------- synthesis ---------------------------------

namespace {

struct SweepPoint {
  Vec p;       // point on Sigma'
  Vec normal;  // Euclidean unit outward normal
  double kappa_min = 0.0, kappa_max = 0.0;
};

// sampled second fundamental form of the unit sphere of `norm` at direction u
SweepPoint sweep_surface_point(const MinkowskiNorm& norm, const Vec& u) {
  SweepPoint out;
  double phi = norm.eval(u);
  out.p = u / phi;
  double val;
  Vec grad;
  Mat hess;
  norm.eval_sq_jet(out.p, val, grad, hess);
  double gn = grad.norm();
  out.normal = grad / gn;
  // tangent frame by Gram-Schmidt against the normal
  std::vector<Vec> frame;
  frame.push_back(out.normal);
  for (int k = 0; k < norm.dim() && frame.size() < static_cast<std::size_t>(norm.dim());
       ++k) {
    Vec e = Vec::Zero(norm.dim());
    e[k] = 1.0;
    for (const Vec& f : frame) e -= f.dot(e) * f;
    double n = e.norm();
    if (n > 1e-8) frame.push_back(e / n);
  }
  const int nt = static_cast<int>(frame.size()) - 1;
  Mat S(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = i; j < nt; ++j) {
      S(i, j) = frame[i + 1].dot(hess * frame[j + 1]) / gn;
      S(j, i) = S(i, j);
    }
  Eigen::SelfAdjointEigenSolver<Mat> eig(S);
  out.kappa_min = eig.eigenvalues().minCoeff();
  out.kappa_max = eig.eigenvalues().maxCoeff();
  return out;
}

std::vector<Vec> synthesis_table_directions(const SynthesisOptions& opt) {
  std::vector<Vec> dirs = direction_grid(4, opt.n_table_base);
  // band-concentrated directions around the fiber circle
  const double tilts[] = {0.0, 0.01, 0.03, 0.07, 0.15, 0.3, 0.6, 1.0, 1.35};
  const int n_levels = 9;
  int per_level = std::max(16, opt.n_table_band / (n_levels * 8));
  for (int l = 0; l < n_levels; ++l) {
    double mu = tilts[l];
    for (int i = 0; i < per_level; ++i) {
      double theta = 2.0 * std::numbers::pi * (i + 0.5 * (l % 2)) / per_level;
      for (int j = 0; j < 8; ++j) {
        double psi = 2.0 * std::numbers::pi * j / 8 + 0.3 * l;
        Vec u(4);
        u << std::cos(mu) * std::cos(theta), std::cos(mu) * std::sin(theta),
            std::sin(mu) * std::cos(psi), std::sin(mu) * std::sin(psi);
        dirs.push_back(u);
        if (mu == 0.0) break;  // psi is redundant on the fiber circle
      }
    }
  }
  return dirs;
}

}  // namespace

void extend_and_synthesize(EmbeddingArtifact& artifact, const SynthesisOptions& opt) {
  if (!artifact.source || !artifact.chart)
    throw ConfigError("extend_and_synthesize: artifact is missing source or chart");

  std::string worst_report;
  for (int attempt = 0; attempt <= opt.repair_attempts; ++attempt) {
    BlendedGauge gauge(artifact.source, artifact.sigma);
    // repair: a rounder far zone softens the blend without touching the band
    if (attempt > 0) gauge.scale_kappa(std::pow(2.0, attempt));
    artifact.band_curvature_min = gauge.band_curvature_min();

    std::vector<Vec> dirs = synthesis_table_directions(opt);
    std::vector<std::pair<Vec, double>> table(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
      double N = gauge.value(dirs[i]);
      table[i] = {dirs[i], 1.0 / std::sqrt(N)};
    });

    RadialFitOptions fit_opt;
    fit_opt.holdout_target = opt.fit_target;
    fit_opt.max_degree = opt.fit_max_degree;
    fit_opt.strict = false;
    auto synthesized = std::make_shared<RadialSampledNorm>(4, std::move(table), fit_opt);
    artifact.fit_holdout_error = synthesized->holdout_error();
    artifact.synthesized = synthesized;
    artifact.repair_iterations = attempt;

    // patch containment against the fitted norm
    double patch_res = 0.0;
    const int n_xy = 7, n_dir = 48;
    for (int i = 0; i < n_xy; ++i)
      for (int j = 0; j < n_xy; ++j) {
        Vec2 xy(-artifact.u_radius + 2.0 * artifact.u_radius * i / (n_xy - 1.0),
                -artifact.u_radius + 2.0 * artifact.u_radius * j / (n_xy - 1.0));
        if (xy.squaredNorm() > artifact.u_radius * artifact.u_radius) continue;
        ChartJet jet = artifact.chart->jet(xy);
        for (int k = 0; k < n_dir; ++k) {
          double theta = 2.0 * std::numbers::pi * k / n_dir;
          Vec u(2);
          u << std::cos(theta), std::sin(theta);
          Vec v = legendre_inverse(*artifact.source, u);
          v /= artifact.source->eval(v);
          patch_res = std::max(patch_res, std::abs(synthesized->eval(jet.d1 * v) - 1.0));
        }
      }
    artifact.patch_residual = patch_res;

    // convexity sweep over the fitted surface
    std::vector<Vec> sweep_dirs = direction_grid(4, opt.n_convexity_sweep);
    std::vector<SweepPoint> pts(sweep_dirs.size());
    parallel_for(sweep_dirs.size(),
                 [&](std::size_t i) { pts[i] = sweep_surface_point(*synthesized, sweep_dirs[i]); });
    double min_eig = std::numeric_limits<double>::infinity();
    double k_min = std::numeric_limits<double>::infinity(), k_max = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].kappa_min < min_eig) {
        min_eig = pts[i].kappa_min;
        worst = i;
      }
      k_min = std::min(k_min, pts[i].kappa_min);
      k_max = std::max(k_max, pts[i].kappa_max);
    }
    artifact.convexity_min_eig = min_eig;
    if (!(min_eig > 0.0)) {
      std::ostringstream msg;
      msg << "convexity sweep failed at direction (" << sweep_dirs[worst].transpose()
          << "), smallest SFF eigenvalue " << min_eig;
      worst_report = msg.str();
      continue;
    }
    artifact.curvature_radius_min = 1.0 / k_max;
    artifact.curvature_radius_max = 1.0 / k_min;

    // equidistant / ball-cover stability on the dense grid: curvature radii
    // within [eps, R] means the inward-then-outward eps-equidistant and the
    // R-ball intersection both leave the surface unchanged
    const double R_ball = 2.0 * artifact.curvature_radius_max;
    const double eps_eq = 0.1 * artifact.curvature_radius_min;
    auto rng = make_rng(opt.seed, 77);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    double ball_res = -std::numeric_limits<double>::infinity();
    double eq_res = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 200000; ++s) {
      const SweepPoint& a = pts[pick(rng)];
      const SweepPoint& b = pts[pick(rng)];
      ball_res = std::max(ball_res, (a.p - (b.p - R_ball * b.normal)).norm() - R_ball);
      Vec qa = a.p - eps_eq * a.normal;
      Vec qb = b.p - eps_eq * b.normal;
      eq_res = std::max(eq_res, (qa - qb).dot(b.normal));
    }
    artifact.ball_cover_residual = std::max(0.0, ball_res);
    artifact.equidistant_residual = std::max(0.0, eq_res);
    return;
  }
  throw NumericError("extend_and_synthesize: convexity repair did not converge; " +
                     worst_report);
}

void isometry_certify(EmbeddingArtifact& artifact, const IsometryOptions& opt) {
  if (!artifact.synthesized) throw ConfigError("isometry_certify: synthesize first");
  const double r = artifact.u_radius;
  double err = 0.0;
  auto probe = [&](const Vec2& xy, double theta) {
    ChartJet jet = artifact.chart->jet(xy);
    Vec u(2);
    u << std::cos(theta), std::sin(theta);
    Vec v = legendre_inverse(*artifact.source, u);
    v /= artifact.source->eval(v);
    err = std::max(err, std::abs(artifact.synthesized->eval(jet.d1 * v) - 1.0));
  };
  for (int i = 0; i < opt.n_grid; ++i)
    for (int j = 0; j < opt.n_grid; ++j) {
      Vec2 xy(-r + 2.0 * r * i / (opt.n_grid - 1.0), -r + 2.0 * r * j / (opt.n_grid - 1.0));
      if (xy.squaredNorm() > r * r) continue;
      for (int k = 0; k < opt.n_dirs; ++k)
        probe(xy, 2.0 * std::numbers::pi * k / opt.n_dirs);
    }
  auto rng = make_rng(opt.seed);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> urad(0.0, 1.0);
  for (int k = 0; k < opt.n_random; ++k) {
    double rho = r * std::sqrt(urad(rng));
    double phi = uang(rng);
    probe(Vec2(rho * std::cos(phi), rho * std::sin(phi)), uang(rng));
  }
  artifact.isometry_error = err;

  ImmersedSurface s4;
  s4.ambient = artifact.synthesized;
  s4.chart = artifact.chart;
  s4.domain = {-r, r, -r, r};
  RegionClassification region =
      classify_region(s4, opt.n_saddle_grid, opt.n_saddle_grid, Vec2(1.0, 0.37));
  artifact.all_strictly_saddle = region.n_strict == static_cast<int>(region.verdicts.size());

  artifact.certified = artifact.preconvexity.passed && artifact.band_curvature_min > 0.0 &&
                       artifact.patch_residual <= 1e-7 &&
                       artifact.convexity_min_eig > 0.0 && artifact.isometry_error <= 1e-6 &&
                       artifact.all_strictly_saddle && artifact.fit_holdout_error <= 1e-7;
}

EmbeddingArtifact embed_constant(const MinkowskiNorm& source2d,
                                 const PreconvexityOptions& pre_opt,
                                 const SynthesisOptions& syn_opt,
                                 const IsometryOptions& iso_opt) {
  EmbeddingArtifact artifact;
  ParallelogramResult para = parallelogram_normalize(source2d);
  artifact.parallelogram_transform = para.transform;
  // the normalized norm is the pullback through the inverse transform
  NormPtr source_copy = norm_from_json(norm_to_json(source2d));
  artifact.source =
      std::make_shared<PullbackNorm>(source_copy, Mat(para.transform.inverse()));
  SigmaSearchResult search = sigma_search(*artifact.source, pre_opt);
  if (!search.found)
    throw NumericError("embed_constant: sigma search hit the floor without passing");
  artifact.sigma = search.sigma;
  artifact.u_radius = search.u_radius;
  artifact.support = search.support;
  artifact.preconvexity = search.report;
  artifact.chart = std::make_shared<SaddleQuarticChart>(search.sigma);
  extend_and_synthesize(artifact, syn_opt);
  isometry_certify(artifact, iso_opt);
  return artifact;
}

// ------------------------------ Finsler metrics ------------------------------

RoundSphereMetric::RoundSphereMetric(double curvature, Vec2 center)
    : k_(curvature), center_(center) {
  if (!(curvature > 0.0)) throw ConfigError("round sphere metric: curvature must be > 0");
}

NormPtr RoundSphereMetric::norm_at(const Vec2& x) const {
  Vec2 p = center_ + x;
  double s = 1.0 / (1.0 + 0.25 * k_ * p.squaredNorm());
  return std::make_shared<QuadraticNorm>(Mat(s * s * Mat2::Identity()));
}

BlowupResult blowup_reduce(const FinslerMetric2D& metric, const PreconvexityOptions& pre_opt,
                           const SynthesisOptions& syn_opt, const BlowupOptions& blow_opt) {
  BlowupResult out;
  NormPtr phi0 = metric.norm_at(Vec2::Zero());
  out.artifact = embed_constant(*phi0, pre_opt, syn_opt);
  const Mat2 Tinv = out.artifact.parallelogram_transform.inverse();
  const double r = out.artifact.u_radius;

  // deviation of the varying-fiber patch from Sigma' at blow-up scale eps:
  // fibers are unit circles of phi(eps y) expressed in normalized coordinates
  auto deviation = [&](double eps) {
    double worst = 0.0;
    for (int i = 0; i < blow_opt.n_grid; ++i)
      for (int j = 0; j < blow_opt.n_grid; ++j) {
        Vec2 y(-r + 2.0 * r * i / (blow_opt.n_grid - 1.0),
               -r + 2.0 * r * j / (blow_opt.n_grid - 1.0));
        if (y.squaredNorm() > r * r) continue;
        Vec2 x_orig = Tinv * (eps * y);
        PullbackNorm phi_y(metric.norm_at(x_orig), Mat(Tinv));
        ChartJet jet = out.artifact.chart->jet(y);
        for (int k = 0; k < blow_opt.n_dirs; ++k) {
          double theta = 2.0 * std::numbers::pi * k / blow_opt.n_dirs;
          Vec u(2);
          u << std::cos(theta), std::sin(theta);
          Vec v = legendre_inverse(phi_y, u);
          v /= phi_y.eval(v);
          worst = std::max(worst,
                           std::abs(out.artifact.synthesized->eval(jet.d1 * v) - 1.0));
        }
      }
    return worst;
  };

  double eps = blow_opt.eps_start;
  for (int k = 0; k <= blow_opt.halvings; ++k) {
    out.eps.push_back(eps);
    out.deviation.push_back(deviation(eps));
    eps *= 0.5;
  }
  // ratios are meaningful above the synthesized sphere's own patch residual;
  // a constant metric starts (and stays) at that floor: identity reduction
  const double floor = std::max(4.0 * out.artifact.patch_residual, 1e-12);
  out.converged = true;
  for (std::size_t k = 0; k + 1 < out.deviation.size(); ++k) {
    double ratio = out.deviation[k + 1] / std::max(out.deviation[k], 1e-300);
    out.ratios.push_back(ratio);
    if (out.deviation[k + 1] > floor && ratio > blow_opt.ratio_bound)
      out.converged = false;
  }
  out.chosen_eps = out.eps.back();
  out.final_isometry_error = out.deviation.back();
  return out;
}

// ------------------------------ serialization ------------------------------

std::string artifact_to_json(const EmbeddingArtifact& artifact) {
  json j;
  j["sigma"] = artifact.sigma;
  j["u_radius"] = artifact.u_radius;
  j["parallelogram_transform"] = {
      {artifact.parallelogram_transform(0, 0), artifact.parallelogram_transform(0, 1)},
      {artifact.parallelogram_transform(1, 0), artifact.parallelogram_transform(1, 1)}};
  j["support"] = {{"a0", artifact.support.a0}, {"c0", artifact.support.c0}};
  j["preconvexity"] = {{"passed", artifact.preconvexity.passed},
                       {"c_est", artifact.preconvexity.c_est},
                       {"max_violation", artifact.preconvexity.max_violation}};
  j["certificates"] = {{"band_curvature_min", artifact.band_curvature_min},
                       {"fit_holdout_error", artifact.fit_holdout_error},
                       {"patch_residual", artifact.patch_residual},
                       {"convexity_min_eig", artifact.convexity_min_eig},
                       {"curvature_radius_min", artifact.curvature_radius_min},
                       {"curvature_radius_max", artifact.curvature_radius_max},
                       {"equidistant_residual", artifact.equidistant_residual},
                       {"ball_cover_residual", artifact.ball_cover_residual},
                       {"repair_iterations", artifact.repair_iterations},
                       {"isometry_error", artifact.isometry_error},
                       {"all_strictly_saddle", artifact.all_strictly_saddle},
                       {"certified", artifact.certified}};
  if (artifact.source) j["source"] = json::parse(norm_to_json(*artifact.source));
  if (artifact.synthesized)
    j["synthesized"] = json::parse(norm_to_json(*artifact.synthesized));
  return j.dump();
}

std::string metric_to_json(const FinslerMetric2D& metric) {
  json j;
  j["kind"] = metric.kind();
  if (const auto* c = dynamic_cast<const ConstantMetric*>(&metric)) {
    j["norm"] = json::parse(norm_to_json(*c->norm_at(Vec2::Zero())));
  } else if (const auto* rs = dynamic_cast<const RoundSphereMetric*>(&metric)) {
    j["curvature"] = rs->curvature();
    j["center"] = {rs->center()[0], rs->center()[1]};
  } else {
    throw ConfigError("metric kind is not serializable: " + metric.kind());
  }
  return j.dump();
}

std::shared_ptr<const FinslerMetric2D> metric_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("metric JSON parse error: ") + e.what());
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant")
    return std::make_shared<ConstantMetric>(norm_from_json(j.at("norm").dump()));
  if (kind == "round_sphere") {
    Vec2 center(0, 0);
    if (j.contains("center")) center = Vec2(j["center"][0], j["center"][1]);
    return std::make_shared<RoundSphereMetric>(j.at("curvature").get<double>(), center);
  }
  throw ConfigError("unknown metric kind: " + kind);
}

}  // namespace minkgeo
