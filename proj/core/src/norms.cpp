// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/norms.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace minkgeo {

using nlohmann::json;

// ------------------------------ MinkowskiNorm ------------------------------

MinkowskiNorm::MinkowskiNorm(int dim) : dim_(dim) {
  if (dim < 2 || dim > 4) throw ConfigError("norm dimension must be 2, 3 or 4");
}

void MinkowskiNorm::check_nonzero(const Vec& v) const {
  if (v.size() != dim_) throw DomainError("vector dimension mismatch");
  if (v.squaredNorm() == 0.0)
    throw DomainError("derivative of the norm requested at the zero vector");
}

double MinkowskiNorm::eval(const Vec& v) const {
  if (v.size() != dim_) throw DomainError("vector dimension mismatch");
  if (v.squaredNorm() == 0.0) return 0.0;
  return std::sqrt(std::max(eval_sq(v), 0.0));
}

// ------------------------------- operations -------------------------------

double norm_eval(const MinkowskiNorm& norm, const Vec& v) { return norm.eval(v); }

Covector legendre(const MinkowskiNorm& norm, const Vec& v) {
  double val;
  Vec grad;
  Mat hess;
  norm.eval_sq_jet(v, val, grad, hess);
  return 0.5 * grad;
}

Mat half_hessian(const MinkowskiNorm& norm, const Vec& v) {
  double val;
  Vec grad;
  Mat hess;
  norm.eval_sq_jet(v, val, grad, hess);
  return 0.5 * hess;
}

Vec legendre_inverse(const MinkowskiNorm& norm, const Covector& L) {
  if (L.size() != norm.dim()) throw DomainError("covector dimension mismatch");
  const double L_norm = L.norm();
  if (L_norm == 0.0)
    throw DomainError("inverse legendre transform of the zero covector");

  Vec v = norm.quadratic_seed().ldlt().solve(L);
  if (!v.allFinite() || v.norm() < 1e-14) v = L / L_norm;

  const double tol = 1e-10 * std::max(1.0, L_norm);
  double val;
  Vec grad;
  Mat hess;
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    norm.eval_sq_jet(v, val, grad, hess);
    Vec F = 0.5 * grad - L;
    residual = F.norm();
    if (residual <= tol) return v;
    Vec step = (0.5 * hess).ldlt().solve(-F);
    if (!step.allFinite()) break;
    // positive definiteness of the half-Hessian makes this a descent
    // direction; backtrack on the residual norm
    bool accepted = false;
    for (double t = 1.0; t >= 1e-6; t *= 0.5) {
      Vec vt = v + t * step;
      if (vt.norm() < 1e-14) continue;
      norm.eval_sq_jet(vt, val, grad, hess);
      if ((0.5 * grad - L).norm() <= (1.0 - 0.25 * t) * residual) {
        v = vt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  std::ostringstream msg;
  msg << "legendre_inverse did not converge, residual " << residual;
  throw NumericError(msg.str());
}

double dual_eval(const MinkowskiNorm& norm, const Covector& L) {
  if (L.size() != norm.dim()) throw DomainError("covector dimension mismatch");
  if (L.squaredNorm() == 0.0) return 0.0;
  return norm.eval(legendre_inverse(norm, L));
}

std::vector<Vec> direction_grid(int dim, int n) {
  std::vector<Vec> dirs;
  dirs.reserve(n);
  if (dim == 2) {
    for (int k = 0; k < n; ++k) {
      double theta = 2.0 * std::numbers::pi * k / n;
      Vec u(2);
      u << std::cos(theta), std::sin(theta);
      dirs.push_back(u);
    }
  } else if (dim == 3) {
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / n;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double phi = ga * k;
      Vec u(3);
      u << r * std::cos(phi), r * std::sin(phi), z;
      dirs.push_back(u);
    }
  } else {
    auto rng = make_rng(0x6d696e6b67656fULL, static_cast<std::uint64_t>(n));
    for (int k = 0; k < n; ++k) dirs.push_back(random_direction(rng, dim));
  }
  return dirs;
}

double hessian_eigenvalue_sweep(const MinkowskiNorm& norm, int n_dirs) {
  int n = n_dirs;
  if (n <= 0) n = norm.dim() == 2 ? 360 : (norm.dim() == 3 ? 2000 : 4000);
  double min_eig = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  for (const Vec& u : direction_grid(norm.dim(), n)) {
    solver.compute(half_hessian(norm, u));
    min_eig = std::min(min_eig, solver.eigenvalues().minCoeff());
  }
  return min_eig;
}

// ------------------------------ QuadraticNorm ------------------------------

QuadraticNorm::QuadraticNorm(Mat A) : MinkowskiNorm(static_cast<int>(A.rows())), A_(std::move(A)) {
  if (A_.rows() != A_.cols()) throw ConfigError("quadratic norm: A must be square");
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A_.cwiseAbs().maxCoeff()))
    throw ConfigError("quadratic norm: A must be symmetric");
  A_ = 0.5 * (A_ + A_.transpose().eval());
  Eigen::LLT<Mat> llt(A_);
  if (llt.info() != Eigen::Success)
    throw ConfigError("quadratic norm: A is not positive definite");
}

double QuadraticNorm::eval_sq(const Vec& v) const { return v.dot(A_ * v); }

void QuadraticNorm::eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const {
  check_nonzero(v);
  Vec Av = A_ * v;
  val = v.dot(Av);
  grad = 2.0 * Av;
  hess = 2.0 * A_;
}

// --------------------------- QuarticPerturbedNorm ---------------------------

std::vector<QuarticTerm> QuarticPerturbedNorm::diagonal_quartic(int dim) {
  std::vector<QuarticTerm> terms;
  for (int i = 0; i < dim; ++i) {
    QuarticTerm t;
    t.coeff = 1.0;
    t.exps[i] = 4;
    terms.push_back(t);
  }
  return terms;
}

QuarticPerturbedNorm::QuarticPerturbedNorm(Mat A, std::vector<QuarticTerm> quartic,
                                           double lambda)
    : MinkowskiNorm(static_cast<int>(A.rows())),
      A_(std::move(A)),
      quartic_(std::move(quartic)),
      lambda_(lambda) {
  if (A_.rows() != A_.cols()) throw ConfigError("quartic norm: A must be square");
  A_ = 0.5 * (A_ + A_.transpose().eval());
  Eigen::LLT<Mat> llt(A_);
  if (llt.info() != Eigen::Success)
    throw ConfigError("quartic norm: A is not positive definite");
  if (lambda_ < 0.0) throw ConfigError("quartic norm: lambda must be >= 0");
  for (const auto& t : quartic_) {
    int total = 0;
    for (int i = 0; i < 4; ++i) {
      if (t.exps[i] < 0) throw ConfigError("quartic norm: negative exponent");
      if (i >= dim_ && t.exps[i] != 0)
        throw ConfigError("quartic norm: exponent beyond dimension");
      total += t.exps[i];
    }
    if (total != 4) throw ConfigError("quartic norm: terms must have degree 4");
  }
  if (lambda_ > 0.0) {
    double min_eig = hessian_eigenvalue_sweep(*this);
    if (!(min_eig > 0.0)) {
      std::ostringstream msg;
      msg << "quartic norm: lambda " << lambda_
          << " breaks quadratic convexity (smallest Hessian eigenvalue "
          << min_eig << ")";
      throw ConfigError(msg.str());
    }
  }
}

double QuarticPerturbedNorm::quartic_value(const Vec& v) const {
  double p = 0.0;
  for (const auto& t : quartic_) {
    double m = t.coeff;
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < t.exps[i]; ++k) m *= v[i];
    p += m;
  }
  return p;
}

void QuarticPerturbedNorm::quartic_jet(const Vec& v, double& p, Vec& dp, Mat& d2p) const {
  p = 0.0;
  dp = Vec::Zero(dim_);
  d2p = Mat::Zero(dim_, dim_);
  // power table v_i^k for k <= 4
  double pw[4][5];
  for (int i = 0; i < dim_; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= 4; ++k) pw[i][k] = pw[i][k - 1] * v[i];
  }
  for (const auto& t : quartic_) {
    double m = t.coeff;
    for (int i = 0; i < dim_; ++i) m *= pw[i][t.exps[i]];
    p += m;
    for (int i = 0; i < dim_; ++i) {
      if (t.exps[i] == 0) continue;
      double gi = t.coeff * t.exps[i] * pw[i][t.exps[i] - 1];
      for (int j = 0; j < dim_; ++j)
        if (j != i) gi *= pw[j][t.exps[j]];
      dp[i] += gi;
      // diagonal second derivative
      if (t.exps[i] >= 2) {
        double hii = t.coeff * t.exps[i] * (t.exps[i] - 1) * pw[i][t.exps[i] - 2];
        for (int j = 0; j < dim_; ++j)
          if (j != i) hii *= pw[j][t.exps[j]];
        d2p(i, i) += hii;
      }
      for (int j = i + 1; j < dim_; ++j) {
        if (t.exps[j] == 0) continue;
        double hij = t.coeff * t.exps[i] * t.exps[j] * pw[i][t.exps[i] - 1] *
                     pw[j][t.exps[j] - 1];
        for (int k = 0; k < dim_; ++k)
          if (k != i && k != j) hij *= pw[k][t.exps[k]];
        d2p(i, j) += hij;
        d2p(j, i) += hij;
      }
    }
  }
}

double QuarticPerturbedNorm::eval_sq(const Vec& v) const {
  double q = v.dot(A_ * v);
  if (q == 0.0) return 0.0;
  if (lambda_ == 0.0) return q;
  return q + lambda_ * quartic_value(v) / q;
}

void QuarticPerturbedNorm::eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const {
  check_nonzero(v);
  Vec Av = A_ * v;
  double q = v.dot(Av);
  Vec dq = 2.0 * Av;
  if (lambda_ == 0.0) {
    val = q;
    grad = dq;
    hess = 2.0 * A_;
    return;
  }
  double p;
  Vec dp;
  Mat d2p;
  quartic_jet(v, p, dp, d2p);
  // u = p/q and its derivatives
  double u = p / q;
  Vec du = (dp - u * dq) / q;
  Mat d2u = (d2p - du * dq.transpose() - dq * du.transpose() - 2.0 * u * A_) / q;
  val = q + lambda_ * u;
  grad = dq + lambda_ * du;
  hess = 2.0 * A_ + lambda_ * d2u;
}

// ---------------------------- RadialSampledNorm ----------------------------

namespace {

void enumerate_monomials(int dim, int degree, std::array<int, 4> current, int pos,
                         int remaining, std::vector<std::array<int, 4>>& out) {
  if (pos == dim - 1) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[pos] = e;
    enumerate_monomials(dim, degree, current, pos + 1, remaining - e, out);
  }
}

std::vector<std::array<int, 4>> monomials_of_degree(int dim, int degree) {
  std::vector<std::array<int, 4>> out;
  enumerate_monomials(dim, degree, {0, 0, 0, 0}, 0, degree, out);
  return out;
}

double monomial_value(const Vec& v, const std::array<int, 4>& e, int dim) {
  double m = 1.0;
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < e[i]; ++k) m *= v[i];
  return m;
}

}  // namespace

RadialSampledNorm::RadialSampledNorm(int dim, std::vector<std::pair<Vec, double>> table,
                                     RadialFitOptions options)
    : MinkowskiNorm(dim), options_(options) {
  if (table.size() < 8) throw ConfigError("radial table: need at least 8 samples");
  table_.reserve(2 * table.size());
  for (auto& [u, r] : table) {
    if (u.size() != dim) throw ConfigError("radial table: direction dimension mismatch");
    double n = u.norm();
    if (!(n > 0.0) || !(r > 0.0))
      throw ConfigError("radial table: directions and radii must be nonzero");
    Vec un = u / n;
    table_.emplace_back(un, r);
    table_.emplace_back(-un, r);  // symmetrized: Phi(v) = Phi(-v) by construction
  }
  fit();
  double min_eig = hessian_eigenvalue_sweep(*this);
  if (!(min_eig > 0.0)) {
    std::ostringstream msg;
    msg << "radial table fit is not quadratically convex (smallest Hessian "
           "eigenvalue "
        << min_eig << ")";
    throw ConfigError(msg.str());
  }
}

void RadialSampledNorm::fit() {
  // fit/held-out split by stride; targets are W = 1/R^2 on the sphere
  std::vector<std::size_t> fit_idx, holdout_idx;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (i % 7 == 3)
      holdout_idx.push_back(i);
    else
      fit_idx.push_back(i);
  }
  // large 4D tables: cap the fit subset, keeping the deterministic order
  const std::size_t max_fit = dim_ == 4 ? 6000 : 4000;
  if (fit_idx.size() > max_fit) {
    std::vector<std::size_t> reduced;
    double stride = static_cast<double>(fit_idx.size()) / max_fit;
    for (std::size_t k = 0; k < max_fit; ++k)
      reduced.push_back(fit_idx[static_cast<std::size_t>(k * stride)]);
    fit_idx = std::move(reduced);
  }

  auto try_degree = [&](int m, Vec& coeffs, std::vector<std::array<int, 4>>& exps,
                        double& error) -> bool {
    exps = monomials_of_degree(dim_, 2 * m);
    const std::size_t n_basis = exps.size();
    if (n_basis > 3000 || n_basis > fit_idx.size()) return false;
    Mat XtX = Mat::Zero(n_basis, n_basis);
    Vec Xty = Vec::Zero(n_basis);
    Vec row(n_basis);
    for (std::size_t i : fit_idx) {
      const auto& [u, r] = table_[i];
      for (std::size_t j = 0; j < n_basis; ++j) row[j] = monomial_value(u, exps[j], dim_);
      double w = 1.0 / (r * r);
      XtX.selfadjointView<Eigen::Lower>().rankUpdate(row);
      Xty += w * row;
    }
    XtX = XtX.selfadjointView<Eigen::Lower>();
    // equilibrated, ridge-stabilized normal equations; two refinement passes
    // against the raw data claw back the digits the normal equations lose
    Vec scale = XtX.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Mat A = scale.asDiagonal() * XtX * scale.asDiagonal();
    A.diagonal().array() += 1e-13;
    Eigen::LDLT<Mat> solver(A);
    coeffs = scale.asDiagonal() * Vec(solver.solve(Vec(scale.asDiagonal() * Xty)));
    if (!coeffs.allFinite()) return false;
    for (int refine = 0; refine < 2; ++refine) {
      Vec grad = Vec::Zero(n_basis);
      for (std::size_t i : fit_idx) {
        const auto& [u, r] = table_[i];
        for (std::size_t j = 0; j < n_basis; ++j) row[j] = monomial_value(u, exps[j], dim_);
        grad += (1.0 / (r * r) - row.dot(coeffs)) * row;
      }
      coeffs += scale.asDiagonal() * Vec(solver.solve(Vec(scale.asDiagonal() * grad)));
    }
    // held-out radius error, relative
    error = 0.0;
    const auto& check = holdout_idx.empty() ? fit_idx : holdout_idx;
    for (std::size_t i : check) {
      const auto& [u, r] = table_[i];
      double P = 0.0;
      for (std::size_t j = 0; j < n_basis; ++j)
        P += coeffs[j] * monomial_value(u, exps[j], dim_);
      if (!(P > 0.0)) return false;
      error = std::max(error, std::abs(1.0 / std::sqrt(P) - r) / r);
    }
    return true;
  };

  double best_error = std::numeric_limits<double>::infinity();
  bool have_fit = false;
  const int degree_cap = std::min(options_.max_degree, 30);
  for (int m = 1; 2 * m <= degree_cap; ++m) {
    Vec coeffs;
    std::vector<std::array<int, 4>> exps;
    double error;
    if (!try_degree(m, coeffs, exps, error)) continue;
    if (m == 1) {
      // quadratic fit doubles as the Newton seed
      Mat B = Mat::Zero(dim_, dim_);
      for (std::size_t j = 0; j < exps.size(); ++j) {
        int a = -1, b = -1;
        for (int i = 0; i < dim_; ++i) {
          if (exps[j][i] == 2) a = b = i;
          if (exps[j][i] == 1) (a < 0 ? a : b) = i;
        }
        if (a == b)
          B(a, a) += coeffs[j];
        else {
          B(a, b) += 0.5 * coeffs[j];
          B(b, a) += 0.5 * coeffs[j];
        }
      }
      Eigen::LLT<Mat> llt(B);
      seed_ = llt.info() == Eigen::Success ? B : Mat::Identity(dim_, dim_);
    }
    if (error < best_error) {
      best_error = error;
      coeffs_ = coeffs;
      exponents_ = std::move(exps);
      half_degree_ = m;
      have_fit = true;
    }
    if (best_error <= options_.holdout_target) break;
  }
  if (seed_.size() == 0) seed_ = Mat::Identity(dim_, dim_);
  if (!have_fit) throw ConfigError("radial table fit failed at every degree");
  holdout_error_ = best_error;
  if (options_.strict && best_error > options_.holdout_target) {
    std::ostringstream msg;
    msg << "radial table fit missed the held-out target: " << best_error << " > "
        << options_.holdout_target;
    throw ConfigError(msg.str());
  }
}

double RadialSampledNorm::poly_value(const Vec& v) const {
  double P = 0.0;
  for (std::size_t j = 0; j < exponents_.size(); ++j)
    P += coeffs_[j] * monomial_value(v, exponents_[j], dim_);
  return P;
}

double RadialSampledNorm::eval_sq(const Vec& v) const {
  double s = v.squaredNorm();
  if (s == 0.0) return 0.0;
  return poly_value(v) / std::pow(s, half_degree_ - 1);
}

void RadialSampledNorm::eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const {
  check_nonzero(v);
  const int m = half_degree_;
  // jet of the homogeneous polynomial P
  double P = 0.0;
  Vec dP = Vec::Zero(dim_);
  Mat d2P = Mat::Zero(dim_, dim_);
  double pw[4][32];
  for (int i = 0; i < dim_; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= 2 * m; ++k) pw[i][k] = pw[i][k - 1] * v[i];
  }
  for (std::size_t t = 0; t < exponents_.size(); ++t) {
    const auto& e = exponents_[t];
    const double c = coeffs_[t];
    double mval = c;
    for (int i = 0; i < dim_; ++i) mval *= pw[i][e[i]];
    P += mval;
    for (int i = 0; i < dim_; ++i) {
      if (e[i] == 0) continue;
      double gi = c * e[i] * pw[i][e[i] - 1];
      for (int j = 0; j < dim_; ++j)
        if (j != i) gi *= pw[j][e[j]];
      dP[i] += gi;
      if (e[i] >= 2) {
        double hii = c * e[i] * (e[i] - 1) * pw[i][e[i] - 2];
        for (int j = 0; j < dim_; ++j)
          if (j != i) hii *= pw[j][e[j]];
        d2P(i, i) += hii;
      }
      for (int j = i + 1; j < dim_; ++j) {
        if (e[j] == 0) continue;
        double hij = c * e[i] * e[j] * pw[i][e[i] - 1] * pw[j][e[j] - 1];
        for (int k = 0; k < dim_; ++k)
          if (k != i && k != j) hij *= pw[k][e[k]];
        d2P(i, j) += hij;
        d2P(j, i) += hij;
      }
    }
  }
  if (m == 1) {
    val = P;
    grad = dP;
    hess = d2P;
    return;
  }
  // Phi^2 = P * g with g = s^-(m-1), s = |v|^2
  double s = v.squaredNorm();
  double g = std::pow(s, -(m - 1));
  Vec dg = (-2.0 * (m - 1) * g / s) * v;
  Mat d2g = (-2.0 * (m - 1) * g / s) * Mat::Identity(dim_, dim_) +
            (4.0 * m * (m - 1) * g / (s * s)) * (v * v.transpose());
  val = P * g;
  grad = g * dP + P * dg;
  hess = g * d2P + dP * dg.transpose() + dg * dP.transpose() + P * d2g;
}

// ------------------------------- PullbackNorm -------------------------------

PullbackNorm::PullbackNorm(NormPtr base, Mat map)
    : MinkowskiNorm(static_cast<int>(map.cols())), base_(std::move(base)), map_(std::move(map)) {
  if (!base_) throw ConfigError("pullback norm: null base");
  if (map_.rows() != base_->dim())
    throw ConfigError("pullback norm: map rows must match base dimension");
  Eigen::JacobiSVD<Mat> svd(map_);
  double smin = svd.singularValues().minCoeff();
  if (!(smin > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff())))
    throw ConfigError("pullback norm: map is rank deficient");
}

double PullbackNorm::eval_sq(const Vec& v) const { return base_->eval_sq(map_ * v); }

void PullbackNorm::eval_sq_jet(const Vec& v, double& val, Vec& grad, Mat& hess) const {
  check_nonzero(v);
  double bval;
  Vec bgrad;
  Mat bhess;
  base_->eval_sq_jet(map_ * v, bval, bgrad, bhess);
  val = bval;
  grad = map_.transpose() * bgrad;
  hess = map_.transpose() * bhess * map_;
}

Mat PullbackNorm::quadratic_seed() const {
  return map_.transpose() * base_->quadratic_seed() * map_;
}

// ------------------------------ serialization ------------------------------

namespace {

json matrix_to_json(const Mat& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix");
  Mat A(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw ConfigError("ragged matrix");
    for (std::size_t k = 0; k < j[i].size(); ++k) A(i, k) = j[i][k].get<double>();
  }
  return A;
}

json norm_to_json_obj(const MinkowskiNorm& norm) {
  json out;
  out["dim"] = norm.dim();
  if (const auto* q = dynamic_cast<const QuadraticNorm*>(&norm)) {
    out["family"] = "quadratic";
    out["params"] = {{"A", matrix_to_json(q->matrix())}};
  } else if (const auto* q4 = dynamic_cast<const QuarticPerturbedNorm*>(&norm)) {
    out["family"] = "quartic_perturbed";
    json terms = json::array();
    for (const auto& t : q4->quartic()) {
      json exps = json::array();
      for (int i = 0; i < norm.dim(); ++i) exps.push_back(t.exps[i]);
      terms.push_back({{"coeff", t.coeff}, {"exps", exps}});
    }
    out["params"] = {{"A", matrix_to_json(q4->matrix())},
                     {"lambda", q4->lambda()},
                     {"quartic", terms}};
  } else if (const auto* rs = dynamic_cast<const RadialSampledNorm*>(&norm)) {
    out["family"] = "radial_sampled";
    json table = json::array();
    for (const auto& [u, r] : rs->table()) {
      json dir = json::array();
      for (int i = 0; i < norm.dim(); ++i) dir.push_back(u[i]);
      table.push_back(json::array({dir, r}));
    }
    out["params"] = {{"table", table},
                     {"fit_target", rs->options().holdout_target},
                     {"max_degree", rs->options().max_degree}};
  } else if (const auto* pb = dynamic_cast<const PullbackNorm*>(&norm)) {
    out["family"] = "pullback";
    out["params"] = {{"base", json::parse(norm_to_json(*pb->base()))},
                     {"map", matrix_to_json(pb->map())}};
  } else {
    throw ConfigError("norm family is not serializable: " + norm.family());
  }
  return out;
}

NormPtr norm_from_json_obj(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int dim = j.at("dim").get<int>();
  const json& params = j.at("params");
  if (family == "quadratic") {
    return std::make_shared<QuadraticNorm>(matrix_from_json(params.at("A")));
  }
  if (family == "quartic_perturbed") {
    std::vector<QuarticTerm> terms;
    for (const auto& t : params.at("quartic")) {
      QuarticTerm term;
      term.coeff = t.at("coeff").get<double>();
      const auto& exps = t.at("exps");
      for (std::size_t i = 0; i < exps.size() && i < 4; ++i)
        term.exps[i] = exps[i].get<int>();
      terms.push_back(term);
    }
    return std::make_shared<QuarticPerturbedNorm>(matrix_from_json(params.at("A")),
                                                  std::move(terms),
                                                  params.at("lambda").get<double>());
  }
  if (family == "radial_sampled") {
    std::vector<std::pair<Vec, double>> table;
    for (const auto& entry : params.at("table")) {
      const auto& dir = entry.at(0);
      Vec u(dim);
      for (int i = 0; i < dim; ++i) u[i] = dir.at(i).get<double>();
      table.emplace_back(u, entry.at(1).get<double>());
    }
    RadialFitOptions opt;
    if (params.contains("fit_target")) opt.holdout_target = params["fit_target"].get<double>();
    if (params.contains("max_degree")) opt.max_degree = params["max_degree"].get<int>();
    return std::make_shared<RadialSampledNorm>(dim, std::move(table), opt);
  }
  if (family == "pullback") {
    return std::make_shared<PullbackNorm>(norm_from_json_obj(params.at("base")),
                                          matrix_from_json(params.at("map")));
  }
  throw ConfigError("unknown norm family: " + family);
}

}  // namespace

std::string norm_to_json(const MinkowskiNorm& norm) {
  return norm_to_json_obj(norm).dump();
}

NormPtr norm_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("norm JSON parse error: ") + e.what());
  }
  return norm_from_json_obj(j);
}

}  // namespace minkgeo
