// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/norms.hpp"

#include <memory>
#include <string>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// Immersed parameterized surfaces S : U subset R^2 -> R^n (n = 3 or 4) with
// two derivative orders, their induced Finsler metrics phi(v) = Phi(dS v),
// and the saddle classifier based on the second fundamental form pencil
// relative to an auxiliary Euclidean structure Q = half_hessian(Phi).
// ---------------------------------------------------------------------------

/// Chart value with first and second derivatives at a parameter point.
struct ChartJet {
  Vec value;            // S(x),  R^n
  Mat d1;               // dS(x), n x 2
  Vec dxx, dxy, dyy;    // second partials, symmetric in the lower slots
};

class Chart {
 public:
  virtual ~Chart() = default;
  virtual int ambient_dim() const = 0;
  virtual ChartJet jet(const Vec2& x) const = 0;
  virtual Vec eval(const Vec2& x) const { return jet(x).value; }
  virtual std::string type() const = 0;
};

using ChartPtr = std::shared_ptr<const Chart>;

/// S(x,y) = p + x a + y b.
class AffineChart final : public Chart {
 public:
  AffineChart(Vec p, Vec a, Vec b);
  int ambient_dim() const override { return static_cast<int>(p_.size()); }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "affine"; }
  const Vec& origin() const { return p_; }
  const Vec& axis_a() const { return a_; }
  const Vec& axis_b() const { return b_; }

 private:
  Vec p_, a_, b_;
};

/// One polynomial term c * x^i y^j of a chart component.
struct ChartMonomial {
  double coeff = 0.0;
  int px = 0;
  int py = 0;
};

/// Each ambient component is a bivariate polynomial; covers graph charts like
/// (x, y, q(x,y)) and random test charts with analytic jets.
class PolynomialChart final : public Chart {
 public:
  explicit PolynomialChart(std::vector<std::vector<ChartMonomial>> components);
  int ambient_dim() const override { return static_cast<int>(components_.size()); }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "polynomial"; }
  const std::vector<std::vector<ChartMonomial>>& components() const { return components_; }

  /// (x, y, c20 x^2 + c11 xy + c02 y^2) in R^3.
  static std::shared_ptr<PolynomialChart> quadratic_graph(double c20, double c11, double c02);

 private:
  std::vector<std::vector<ChartMonomial>> components_;
};

/// Round sphere of radius R: (R cos x cos y, R sin x cos y, R sin y),
/// x = longitude, y = latitude.
class SphereChart final : public Chart {
 public:
  explicit SphereChart(double radius);
  int ambient_dim() const override { return 3; }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "sphere"; }
  double radius() const { return radius_; }

 private:
  double radius_;
};

/// (cos x, sin x, y).
class CylinderChart final : public Chart {
 public:
  int ambient_dim() const override { return 3; }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "cylinder"; }
};

/// Graph of z = sqrt(s^2 + x^2 + y^2): a sharp cone smoothed by a cap of
/// scale s, asymptotically conical.
class CappedConeChart final : public Chart {
 public:
  explicit CappedConeChart(double cap_scale);
  int ambient_dim() const override { return 3; }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "capped_cone"; }
  double cap_scale() const { return s_; }

 private:
  double s_;
};

/// The saddle embedding chart into R^4,
///
///   (x,y) -> (planar(x,y), x^2 - y^2, x y),
///   planar(x,y) = (1 - s^2 x^2 - s^2 y^2) * (x - s x^3, y - s y^3),
///
/// with s = sigma. Its planar Jacobian is I - A(x,y) where the defect matrix
/// A has the closed forms exposed by planar_defect; the tangent lift of this
/// chart over the unit circle of a normalized 2D norm is the pre-convex patch
/// used by the embedding pipeline.
class SaddleQuarticChart final : public Chart {
 public:
  explicit SaddleQuarticChart(double sigma);
  int ambient_dim() const override { return 4; }
  ChartJet jet(const Vec2& x) const override;
  std::string type() const override { return "saddle_quartic"; }
  double sigma() const { return sigma_; }

  Vec2 planar(double x, double y) const;
  /// A(x,y) with d(planar) = I - A; entries:
  ///   A11 = 3 s x^2 + s^2 x^2 (3 - 5 s x^2) + s^2 y^2 (1 - 3 s x^2)
  ///   A12 = 2 s^2 x y (1 - s x^2),  A21 = 2 s^2 x y (1 - s y^2)
  ///   A22 = 3 s y^2 + s^2 y^2 (3 - 5 s y^2) + s^2 x^2 (1 - 3 s y^2)
  Mat2 planar_defect(double x, double y) const;
  /// Quadratic truncation of planar_defect in (x,y); the exact leading term
  /// of the patch curvature used by the band model of the synthesized norm.
  Mat2 planar_defect_quadratic(double x, double y) const;

 private:
  double sigma_;
};

/// Wraps a chart, replacing its jets with centered finite differences of the
/// value map (order h^2); used to cross-check analytic jets.
class FiniteDifferenceChart final : public Chart {
 public:
  FiniteDifferenceChart(ChartPtr inner, double step);
  int ambient_dim() const override { return inner_->ambient_dim(); }
  ChartJet jet(const Vec2& x) const override;
  Vec eval(const Vec2& x) const override { return inner_->eval(x); }
  std::string type() const override { return "finite_difference"; }

 private:
  ChartPtr inner_;
  double h_;
};

// ------------------------------ ImmersedSurface ------------------------------

struct DomainRect {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  bool contains(const Vec2& x, double margin = 0.0) const {
    return x[0] >= xmin + margin && x[0] <= xmax - margin && x[1] >= ymin + margin &&
           x[1] <= ymax - margin;
  }
};

struct ImmersedSurface {
  NormPtr ambient;
  ChartPtr chart;
  DomainRect domain;
  double immersion_tol = 1e-8;

  ChartJet jet(const Vec2& x) const { return chart->jet(x); }
};

// -------------------------------- operations --------------------------------

/// The pullback norm v -> Phi(dS(x) v) on R^2, derivatives chained through
/// dS. Throws DomainError when dS is rank deficient at x (immersion failure).
NormPtr induced_metric(const ImmersedSurface& surface, const Vec2& x);

/// Second fundamental forms II_k(u,w) = Q(d2S(u,w), n_k) for a deterministic
/// Q-orthonormal basis {n_k} of the normal space, Q = half_hessian of the
/// ambient norm at dS(x) q_direction. One form for n = 3, two for n = 4.
std::vector<Mat2> second_fundamental_pencil(const ImmersedSurface& surface, const Vec2& x,
                                            const Vec2& q_direction);

enum class SaddleClass { strictly_saddle, saddle, not_saddle };

std::string to_string(SaddleClass c);

struct SaddleVerdict {
  Vec2 point;
  SaddleClass cls = SaddleClass::not_saddle;
  // pencil coefficients: det(alpha A + beta B) = alpha^2 detA + alpha beta m
  // + beta^2 detB; for n = 3, detA is the single determinant and detB = m = 0.
  double detA = 0.0;
  double detB = 0.0;
  double mixed = 0.0;
};

/// Closed-form verdict from the pencil determinant quadratic.
SaddleVerdict saddle_classify(const ImmersedSurface& surface, const Vec2& x,
                              const Vec2& q_direction);

/// Classifies the pencil only (shared by saddle_classify and its tests).
SaddleClass classify_pencil(const std::vector<Mat2>& pencil);

/// Brute-force cross-check: sweeps n_samples unit normals of the pencil span
/// and classifies from the sampled determinants.
SaddleClass saddle_classify_sweep(const std::vector<Mat2>& pencil, int n_samples = 720,
                                  double tol = 1e-12);

struct RegionClassification {
  std::vector<SaddleVerdict> verdicts;
  int n_strict = 0;
  int n_saddle = 0;
  int n_not = 0;
};

/// Per-node verdicts on an nx-by-ny grid over the surface domain; parallel
/// over nodes.
RegionClassification classify_region(const ImmersedSurface& surface, int nx, int ny,
                                     const Vec2& q_direction);

// ------------------------------ serialization ------------------------------

std::string chart_to_json(const Chart& chart);
ChartPtr chart_from_json(const std::string& text);

std::string surface_to_json(const ImmersedSurface& surface);
ImmersedSurface surface_from_json(const std::string& text);

/// Verdict grid as CSV: x,y,class,detA,detB,m
std::string region_to_csv(const RegionClassification& region);

}  // namespace minkgeo
