// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/common.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// Minkowski norms: smooth, symmetric, quadratically convex norms on R^n,
// n in {2,3,4}, with exact first and second derivatives of the squared norm.
//
// The squared-norm jet (value, gradient, Hessian of Phi^2) is the single
// primitive every family implements; the Legendre transform, dual norm and
// curvature machinery are derived from it:
//
//   legendre(v)      = 1/2 d(Phi^2)(v)
//   half_hessian(v)  = 1/2 d^2(Phi^2)(v)   (positive definite off the origin)
//   dual(L)          = Phi(legendre_inverse(L))
// ---------------------------------------------------------------------------

class MinkowskiNorm {
 public:
  virtual ~MinkowskiNorm() = default;

  int dim() const { return dim_; }
  virtual std::string family() const = 0;

  /// Phi(v); exactly 0 iff v == 0.
  double eval(const Vec& v) const;

  /// Phi^2(v), value only.
  virtual double eval_sq(const Vec& v) const = 0;

  /// Phi^2(v) with gradient and Hessian. Requires v != 0: zero vectors are
  /// rejected loudly instead of returning a continuity value.
  virtual void eval_sq_jet(const Vec& v, double& val, Vec& grad,
                           Mat& hess) const = 0;

  /// A symmetric positive definite matrix with v' A v ~ Phi^2(v); used only
  /// to seed Newton iterations.
  virtual Mat quadratic_seed() const = 0;

 protected:
  explicit MinkowskiNorm(int dim);
  void check_nonzero(const Vec& v) const;
  int dim_;
};

using NormPtr = std::shared_ptr<const MinkowskiNorm>;

// ------------------------------- operations -------------------------------

double norm_eval(const MinkowskiNorm& norm, const Vec& v);

/// Legendre transform L_Phi(v) = 1/2 d(Phi^2)(v). Throws DomainError on v=0.
Covector legendre(const MinkowskiNorm& norm, const Vec& v);

/// 1/2 d^2(Phi^2)(v): positive definite, 0-homogeneous in v.
Mat half_hessian(const MinkowskiNorm& norm, const Vec& v);

/// Dual norm Phi*(L) = sup { <L,v> : Phi(v) = 1 }, computed through the
/// inverse Legendre transform (the maximizer satisfies L_Phi(v*) = L/Phi*(L)).
/// L = 0 returns 0.
double dual_eval(const MinkowskiNorm& norm, const Covector& L);

/// Solves L_Phi(v) = L by damped Newton with the half-Hessian as Jacobian.
/// Throws DomainError on L = 0 and NumericError (with the residual) if the
/// iteration does not converge.
Vec legendre_inverse(const MinkowskiNorm& norm, const Covector& L);

/// Smallest eigenvalue of half_hessian over a deterministic grid of
/// directions (360 for dim 2, ~2000 for dim 3, ~4000 for dim 4).
double hessian_eigenvalue_sweep(const MinkowskiNorm& norm, int n_dirs = 0);

/// Deterministic direction grid used by sweeps (uniform angles in 2D,
/// generalized Fibonacci lattices otherwise).
std::vector<Vec> direction_grid(int dim, int n);

// -------------------------------- families --------------------------------

/// Phi^2(v) = v' A v with A symmetric positive definite.
class QuadraticNorm final : public MinkowskiNorm {
 public:
  explicit QuadraticNorm(Mat A);
  std::string family() const override { return "quadratic"; }
  double eval_sq(const Vec& v) const override;
  void eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const override;
  Mat quadratic_seed() const override { return A_; }
  const Mat& matrix() const { return A_; }

 private:
  Mat A_;
};

/// One monomial of a homogeneous quartic: coeff * prod_i v_i^exps[i],
/// sum(exps) == 4.
struct QuarticTerm {
  double coeff = 0.0;
  std::array<int, 4> exps{0, 0, 0, 0};
};

/// Phi^2(v) = v'Av + lambda * P(v) / (v'Av) with P a homogeneous quartic.
/// Quadratic convexity holds for lambda below a per-instance bound; the
/// constructor runs the Hessian eigenvalue sweep and rejects instances that
/// fail it.
class QuarticPerturbedNorm final : public MinkowskiNorm {
 public:
  QuarticPerturbedNorm(Mat A, std::vector<QuarticTerm> quartic, double lambda);
  std::string family() const override { return "quartic_perturbed"; }
  double eval_sq(const Vec& v) const override;
  void eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const override;
  Mat quadratic_seed() const override { return A_; }

  const Mat& matrix() const { return A_; }
  double lambda() const { return lambda_; }
  const std::vector<QuarticTerm>& quartic() const { return quartic_; }

  /// P(v) = sum_i v_i^4, the default perturbation.
  static std::vector<QuarticTerm> diagonal_quartic(int dim);

 private:
  double quartic_value(const Vec& v) const;
  void quartic_jet(const Vec& v, double& p, Vec& dp, Mat& d2p) const;
  Mat A_;
  std::vector<QuarticTerm> quartic_;
  double lambda_;
};

struct RadialFitOptions {
  double holdout_target = 1e-6;  // max relative radius error on held-out rays
  int max_degree = 24;           // highest even total degree tried by the fit
  bool strict = true;            // throw ConfigError when the target is missed
};

/// A norm given by a dense radial table { (direction, radius) }. The smooth
/// interpolant is a least-squares projection of 1/R^2 onto homogeneous even
/// polynomials restricted to the unit sphere, so
///
///   Phi^2(v) = P(v) / |v|^(2m-2),  deg P = 2m,
///
/// with closed-form derivatives. The degree rises until the held-out target
/// is met. Tables are symmetrized, making Phi(v) = Phi(-v) exact.
class RadialSampledNorm final : public MinkowskiNorm {
 public:
  RadialSampledNorm(int dim, std::vector<std::pair<Vec, double>> table,
                    RadialFitOptions options = {});
  std::string family() const override { return "radial_sampled"; }
  double eval_sq(const Vec& v) const override;
  void eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const override;
  Mat quadratic_seed() const override { return seed_; }

  const std::vector<std::pair<Vec, double>>& table() const { return table_; }
  int fit_degree() const { return 2 * half_degree_; }
  double holdout_error() const { return holdout_error_; }
  const RadialFitOptions& options() const { return options_; }

 private:
  void fit();
  double poly_value(const Vec& v) const;
  std::vector<std::pair<Vec, double>> table_;
  RadialFitOptions options_;
  std::vector<std::array<int, 4>> exponents_;  // monomials of degree 2m
  Vec coeffs_;
  int half_degree_ = 1;  // m
  double holdout_error_ = 0.0;
  Mat seed_;
};

/// The pullback Phi(A v) of a base norm through an injective linear map
/// A : R^sub -> R^base. Covers both linear changes of coordinates (square A)
/// and induced metrics of immersions (A = dS, a tall matrix).
class PullbackNorm final : public MinkowskiNorm {
 public:
  PullbackNorm(NormPtr base, Mat map);
  std::string family() const override { return "pullback(" + base_->family() + ")"; }
  double eval_sq(const Vec& v) const override;
  void eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const override;
  Mat quadratic_seed() const override;
  const Mat& map() const { return map_; }
  const NormPtr& base() const { return base_; }

 private:
  NormPtr base_;
  Mat map_;
};

// ------------------------------ serialization ------------------------------

/// {"family": ..., "dim": ..., "params": {...}}; radial tables are stored as
/// arrays of [direction, radius] pairs.
std::string norm_to_json(const MinkowskiNorm& norm);
NormPtr norm_from_json(const std::string& text);

}  // namespace minkgeo
