// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/surfaces.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// The saddle isometric embedding pipeline. A 2D norm is normalized to
// parallelogram coordinates, the quartic-perturbed saddle chart (surfaces.hpp)
// lifts its unit circle bundle to a pre-convex patch in R^4, and a closed
// symmetric quadratically convex sphere through the patch is synthesized as
// the unit sphere of a 4D radial_sampled norm. Certificates: pre-convexity
// constant, patch containment, convexity sweep, isometry error, saddle grid.
// ---------------------------------------------------------------------------

// ------------------------- parallelogram normalization -------------------------

struct ParallelogramResult {
  Mat2 transform;            // maps the minimizing parallelogram onto [-1,1]^2
  double area = 0.0;         // of the minimal parallelogram, original coords
  double angle1 = 0.0;       // side-normal directions of the optimum
  double angle2 = 0.0;
  double midpoint_residual = 0.0;  // contact-at-side-midpoints check
};

/// Minimum-area parallelogram containing the unit ball, by a 1-degree
/// direction scan refined with golden-section (ties broken by smallest
/// angle). After the transform the ball fits in [-1,1]^2 and touches the
/// side midpoints (+-1,0), (0,+-1).
ParallelogramResult parallelogram_normalize(const MinkowskiNorm& norm2d);

// ------------------------------- tangent lift -------------------------------

/// Jacobian of the normalized tangent lift G(x,y,xi,eta) =
/// (xi, eta, x xi - y eta, x eta + y xi) whose determinant is exactly
/// xi^2 + eta^2; G differs from the raw differential of the sigma = 0 chart
/// by a fixed linear automorphism of R^4, so its determinant certifies
/// injectivity of the lift.
Eigen::Matrix4d tangent_lift_jacobian(double x, double y, double xi, double eta);
double tangent_lift_det(double xi, double eta);

// ----------------------------- support constants -----------------------------

struct SupportEstimate {
  double a0 = 0.0;  // lower bound of the major-axis support coefficient
  double c0 = 0.0;  // quadratic-convexity modulus of the supporting functions
};

/// Dense boundary sampling of a normalized 2D unit ball:
///   c0 = min (1 - L0(v)) / |v - v0|^2 over boundary pairs,
///   a0 = min over v0 of the support component along its major axis.
SupportEstimate estimate_support_constants(const MinkowskiNorm& norm2d, int n_samples = 1024);

// ------------------------------- pre-convexity -------------------------------

struct PreconvexityOptions {
  int n_fiber = 96;   // base points v0 on the unit circle
  int n_xy = 9;       // grid per axis over the (x, y) disc
  int n_dirs = 192;   // directions (xi, eta) on the unit circle
};

struct PreconvexityReport {
  bool passed = false;
  double c_est = 0.0;          // largest c valid on the whole sample grid
  double max_violation = 0.0;  // max(0, L0(df) - 1) over the grid
  double sigma = 0.0;
  double u_radius = 0.0;
};

/// Verifies L0(d(planar)(x,y) v) <= 1 - c (x^2+y^2+|v-v0|^2) over fiber,
/// disc and direction grids for the supporting function L0 at each v0.
PreconvexityReport preconvexity_verify(const MinkowskiNorm& norm2d, double sigma,
                                       double u_radius, const PreconvexityOptions& opt = {});

struct SigmaSearchResult {
  bool found = false;
  double sigma = 0.0;
  double u_radius = 0.0;
  int bisections = 0;
  SupportEstimate support;
  PreconvexityReport report;
};

/// Seeds sigma and the patch radius from the proof constants
///   c1 = a0/18, c2 = a0/3, c3 = c0 c1^2 / 100,
///   sigma0 = min(c2^-2, 0.1)/2, u_radius = 0.99 sqrt(c3 sigma / 10),
/// then bisects sigma downward until preconvexity_verify passes
/// (floor 1e-6).
SigmaSearchResult sigma_search(const MinkowskiNorm& norm2d, const PreconvexityOptions& opt = {});

// --------------------------------- synthesis ---------------------------------

struct SynthesisOptions {
  int n_table_base = 8000;      // quasi-uniform S^3 directions
  int n_table_band = 2048;      // band-concentrated directions
  int n_convexity_sweep = 10000;
  double fit_target = 1e-9;     // held-out goal of the radial fit
  int fit_max_degree = 20;
  double patch_tol = 1e-7;      // max |Phi'(patch) - 1| allowed
  int repair_attempts = 3;
  std::uint64_t seed = 1;
};

struct EmbeddingArtifact {
  NormPtr source;                 // the normalized 2D norm
  Mat2 parallelogram_transform = Mat2::Identity();
  double sigma = 0.0;
  double u_radius = 0.0;
  SupportEstimate support;
  PreconvexityReport preconvexity;
  std::shared_ptr<const SaddleQuarticChart> chart;
  NormPtr synthesized;            // 4D radial_sampled norm of Sigma'

  // certificates
  double band_curvature_min = 0.0;   // min eigenvalue of the band quadratic
  double fit_holdout_error = 0.0;
  double patch_residual = 0.0;       // max |Phi'(p) - 1| over patch samples
  double convexity_min_eig = 0.0;    // sampled second fundamental form of Sigma'
  double curvature_radius_min = 0.0;
  double curvature_radius_max = 0.0;
  double equidistant_residual = 0.0; // inward/outward eps-equidistant stability
  double ball_cover_residual = 0.0;  // R-ball intersection stability
  int repair_iterations = 0;
  double isometry_error = 0.0;
  bool all_strictly_saddle = false;
  bool certified = false;
};

/// The 2-homogeneous blended gauge N(w, z) whose unit set is Sigma':
///
///   N = chi(tau) phi^2(w) + (1 - chi(tau)) w'A2w + kappa |z|^2,
///
/// with the smooth 0-homogeneous partition of unity chi(tau) =
/// (1-tau)^4 (1+4tau+10tau^2), tau = |z|^2/|p|^2, A2 a quadratic model of
/// the source norm, and kappa the mean fiber curvature of the lifted patch
/// (the trace average of the band quadratic over the fiber circle). Because
/// the patch radius forced by the proof constants is tiny, the patch sits on
/// {N = 1} well inside the declared containment tolerance, and the fiber
/// term keeps the band strictly convex. On the unit sphere N restricts to a
/// polynomial of degree <= 14 for both shipped source families, which the
/// radial fit recovers to machine precision. Values only; the synthesized
/// norm's derivatives come from the fitted radial interpolant.
class BlendedGauge {
 public:
  BlendedGauge(NormPtr source2d, double sigma);
  double value(const Vec& p) const;  // p = (w, z) in R^4
  double kappa() const { return kappa_; }
  const Mat2& far_quadratic() const { return far_quad_; }
  /// z-quadratic of the band model at a unit fiber point v.
  Mat2 band_quadratic(const Vec2& v) const;
  /// min eigenvalue of the band quadratic over the fiber circle.
  double band_curvature_min(int n_samples = 512) const;
  void scale_kappa(double factor) { kappa_ *= factor; }

 private:
  NormPtr source_;
  SaddleQuarticChart chart_;
  double sigma_;
  Mat2 far_quad_;  // quadratic model of the source norm for the far zone
  double kappa_;   // z-coefficient of the far ellipsoid
};

/// Builds Sigma' and the 4D norm; fills the synthesis certificates. The
/// convexity repair loop re-blends with a rounder far zone and reruns the
/// sweep; failure leaves certified = false with the worst direction recorded
/// in the thrown NumericError.
void extend_and_synthesize(EmbeddingArtifact& artifact, const SynthesisOptions& opt = {});

struct IsometryOptions {
  int n_grid = 9;        // per axis over the U' disc
  int n_dirs = 64;       // phi-unit directions per point
  int n_random = 1000;   // random (x, v) samples
  int n_saddle_grid = 7; // saddle classification grid per axis
  std::uint64_t seed = 2;
};

/// max |Phi'(dF(x) v) - 1| over the U' grid and phi-unit directions plus
/// random samples; also classifies the chart over U' under the synthesized
/// norm's Q and records whether every node is strictly saddle.
void isometry_certify(EmbeddingArtifact& artifact, const IsometryOptions& opt = {});

/// Full constant-metric pipeline: normalize, estimate, search, verify,
/// synthesize, certify.
EmbeddingArtifact embed_constant(const MinkowskiNorm& source2d,
                                 const PreconvexityOptions& pre_opt = {},
                                 const SynthesisOptions& syn_opt = {},
                                 const IsometryOptions& iso_opt = {});

// ------------------------------ Finsler metrics ------------------------------

/// A point-dependent field of 2D Minkowski norms.
class FinslerMetric2D {
 public:
  virtual ~FinslerMetric2D() = default;
  virtual NormPtr norm_at(const Vec2& x) const = 0;
  virtual std::string kind() const = 0;
};

class ConstantMetric final : public FinslerMetric2D {
 public:
  explicit ConstantMetric(NormPtr norm) : norm_(std::move(norm)) {}
  NormPtr norm_at(const Vec2&) const override { return norm_; }
  std::string kind() const override { return "constant"; }

 private:
  NormPtr norm_;
};

/// Round sphere of curvature k in conformal coordinates around `center`:
/// g(x) = I / (1 + k |center + x|^2 / 4)^2. Positively curved for k > 0.
class RoundSphereMetric final : public FinslerMetric2D {
 public:
  RoundSphereMetric(double curvature, Vec2 center);
  NormPtr norm_at(const Vec2& x) const override;
  std::string kind() const override { return "round_sphere"; }
  double curvature() const { return k_; }
  const Vec2& center() const { return center_; }

 private:
  double k_;
  Vec2 center_;
};

struct BlowupOptions {
  double eps_start = 1.0;
  int halvings = 6;
  double ratio_bound = 0.6;
  int n_grid = 7;
  int n_dirs = 48;
};

struct BlowupResult {
  EmbeddingArtifact artifact;       // from the frozen metric at the origin
  std::vector<double> eps;
  std::vector<double> deviation;    // max |Phi'(dF(y) v) - 1|, v unit for phi(eps y)
  std::vector<double> ratios;       // deviation[k+1] / deviation[k]
  bool converged = false;
  double chosen_eps = 0.0;
  double final_isometry_error = 0.0;
};

/// Freezes the metric at the origin, runs the constant pipeline, then checks
/// that the varying-fiber patches land on Sigma' with deviations contracting
/// as eps halves (the rescaled map eps F(x/eps) has differential dF(x/eps)).
BlowupResult blowup_reduce(const FinslerMetric2D& metric,
                           const PreconvexityOptions& pre_opt = {},
                           const SynthesisOptions& syn_opt = {},
                           const BlowupOptions& blow_opt = {});

// ------------------------------ serialization ------------------------------

std::string artifact_to_json(const EmbeddingArtifact& artifact);

std::string metric_to_json(const FinslerMetric2D& metric);
std::shared_ptr<const FinslerMetric2D> metric_from_json(const std::string& text);

}  // namespace minkgeo
