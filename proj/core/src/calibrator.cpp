// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/calibrator.hpp"

#include "minkgeo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace minkgeo {

namespace {

// distance between two parameter-space segments, for the embeddedness check
double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  double best = std::numeric_limits<double>::infinity();
  const int K = 8;
  for (int i = 0; i <= K; ++i) {
    Vec2 p = a0 + (a1 - a0) * (static_cast<double>(i) / K);
    for (int j = 0; j <= K; ++j) {
      Vec2 q = b0 + (b1 - b0) * (static_cast<double>(j) / K);
      best = std::min(best, (p - q).norm());
    }
  }
  return best;
}

}  // namespace

CalibratorField::CalibratorField(ImmersedSurface surface, GeodesicPath path, double a,
                                 double b, CalibratorOptions options)
    : surface_(std::move(surface)), path_(std::move(path)), a_(a), b_(b), options_(options) {
  if (!(a_ < b_)) throw ConfigError("calibrator: need a < b");
  if (a_ < path_.t_start() + path_.step || b_ > path_.t_end() - path_.step)
    throw ConfigError("calibrator: path must extend beyond [a, b]");
  if (options_.n_t < 5) throw ConfigError("calibrator: n_t must be >= 5");
  if (options_.n_s < 2) throw ConfigError("calibrator: n_s must be >= 2");
  s_max_ = options_.s_max > 0.0 ? options_.s_max : 0.05 * (b_ - a_);

  // embeddedness: no self-intersection of the base path in the chart
  const auto& smp = path_.samples;
  const std::size_t stride = std::max<std::size_t>(1, smp.size() / 200);
  for (std::size_t i = 0; i + stride < smp.size(); i += stride) {
    for (std::size_t j = i + 2 * stride; j + stride < smp.size(); j += stride) {
      double d = segment_distance(smp[i].c, smp[i + stride].c, smp[j].c, smp[j + stride].c);
      double gap = smp[j].t - smp[i + stride].t;
      if (d < 0.25 * gap && d < 1e-9)
        throw DomainError("calibrator: the geodesic self-intersects in the chart");
    }
  }
  build_grid();
}

CalibratorField::State CalibratorField::state(double t) const {
  State st;
  path_.state_at(t, st.c, st.cdot);
  ChartJet jet = surface_.jet(st.c);
  st.gamma_S = jet.value;
  st.gamma_dot_S = jet.d1 * Vec(st.cdot);
  st.L = legendre(*surface_.ambient, st.gamma_dot_S);
  // K = Q(gamma_ddot, .) with gamma_ddot = d2S(cdot,cdot) + dS cddot
  Vec2 cddot = geodesic_acceleration(surface_, st.c, st.cdot);
  Vec gamma_ddot = jet.dxx * (st.cdot[0] * st.cdot[0]) +
                   jet.dxy * (2.0 * st.cdot[0] * st.cdot[1]) +
                   jet.dyy * (st.cdot[1] * st.cdot[1]) + jet.d1 * Vec(cddot);
  Mat Q = half_hessian(*surface_.ambient, st.gamma_dot_S);
  st.K = Q * gamma_ddot;
  return st;
}

double CalibratorField::h_eval(const Vec2& x) const {
  Vec Sx = surface_.jet(x).value;
  // seed at the nearest stored sample
  double t = path_.t_start();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : path_.samples) {
    double d = (s.c - x).squaredNorm();
    if (d < best) {
      best = d;
      t = s.t;
    }
  }
  const double lo = path_.t_start() - path_.step;
  const double hi = path_.t_end() + path_.step;
  for (int iter = 0; iter < 60; ++iter) {
    State st = state(t);
    double F = pair(st.L, Sx - st.gamma_S);
    if (std::abs(F) <= options_.newton_tol) return t;
    double dF = pair(st.K, Sx - st.gamma_S) - pair(st.L, st.gamma_dot_S);
    if (dF == 0.0) break;
    t -= F / dF;
    if (t < lo || t > hi)
      throw DomainError("h_eval: point is outside the calibrated tube");
  }
  throw NumericError("h_eval: implicit solve did not converge");
}

Covector CalibratorField::dh_eval(const Vec2& x) const {
  double t = h_eval(x);
  State st = state(t);
  ChartJet jet = surface_.jet(x);
  Vec diff = jet.value - st.gamma_S;
  double denom = pair(st.L, st.gamma_dot_S) - pair(st.K, diff);
  if (std::abs(denom) < 1e-12) throw NumericError("dh_eval: degenerate implicit derivative");
  Covector dh(2);
  dh[0] = pair(st.L, jet.d1.col(0)) / denom;
  dh[1] = pair(st.L, jet.d1.col(1)) / denom;
  return dh;
}

Vec2 CalibratorField::flow_direction(const Vec2& x) const {
  Covector dh = dh_eval(x);
  NormPtr phi = induced_metric(surface_, x);
  Vec V = legendre_inverse(*phi, dh);
  double scale = pair(dh, V);  // = phi*(dh)^2
  if (!(scale > 0.0)) throw NumericError("flow_direction: vanishing gradient field");
  return Vec2(V[0], V[1]) / scale;
}

Vec2 CalibratorField::level_direction(const Vec2& x, const Vec2& orientation) const {
  Covector dh = dh_eval(x);
  Vec2 k(-dh[1], dh[0]);
  if (k.dot(orientation) < 0.0) k = -k;
  NormPtr phi = induced_metric(surface_, x);
  double n = phi->eval(Vec(k));
  if (!(n > 0.0)) throw NumericError("level_direction: degenerate level set");
  return k / n;
}

Vec2 CalibratorField::project_to_level(Vec2 x, double t_target) const {
  for (int iter = 0; iter < 3; ++iter) {
    double err = h_eval(x) - t_target;
    if (std::abs(err) < 1e-13) break;
    x -= err * flow_direction(x);
  }
  return x;
}

void CalibratorField::build_grid() {
  const int n_t = options_.n_t;
  const int n_s = options_.n_s;
  grid_.n_t = n_t;
  grid_.n_s = n_s;
  grid_.t_nodes.resize(n_t);
  for (int i = 0; i < n_t; ++i) grid_.t_nodes[i] = a_ + (b_ - a_) * i / (n_t - 1.0);
  grid_.s_nodes.resize(2 * n_s + 1);
  const double ds = s_max_ / n_s;
  for (int j = -n_s; j <= n_s; ++j) grid_.s_nodes[j + n_s] = j * ds;
  grid_.node.assign(static_cast<std::size_t>(n_t) * grid_.cols(), Vec2::Zero());
  grid_.rt_param.assign(grid_.node.size(), Vec2::Zero());
  grid_.rho.assign(grid_.node.size(), 0.0);

  // seed level line through gamma(t_mid), arclength-parameterized in the
  // induced metric; integrate the level direction with RK4
  const int i_mid = n_t / 2;
  const double t_mid = grid_.t_nodes[i_mid];
  State mid = state(t_mid);
  // positive s on the left of the geodesic
  Vec2 orient(-mid.cdot[1], mid.cdot[0]);
  std::vector<Vec2> seed(2 * n_s + 1);
  seed[n_s] = mid.c;
  for (int dir = -1; dir <= 1; dir += 2) {
    Vec2 x = mid.c;
    Vec2 ori = dir > 0 ? orient : Vec2(-orient);
    for (int j = 1; j <= n_s; ++j) {
      Vec2 k1 = level_direction(x, ori);
      Vec2 k2 = level_direction(x + 0.5 * ds * k1, k1);
      Vec2 k3 = level_direction(x + 0.5 * ds * k2, k2);
      Vec2 k4 = level_direction(x + ds * k3, k3);
      x += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      x = project_to_level(x, t_mid);
      ori = k4;
      seed[n_s + dir * j] = x;
    }
  }

  // flow each seed point along W = V / <dh, V> to every t node; h increases
  // at unit rate along W, so h(r(t, s)) = t by construction
  parallel_for(static_cast<std::size_t>(2 * n_s + 1), [&](std::size_t js) {
    auto flow_to = [&](Vec2 x, double t_from, double t_to) {
      int macro = options_.flow_substeps;
      double h_step = (t_to - t_from) / macro;
      for (int k = 0; k < macro; ++k) {
        Vec2 k1 = flow_direction(x);
        Vec2 k2 = flow_direction(x + 0.5 * h_step * k1);
        Vec2 k3 = flow_direction(x + 0.5 * h_step * k2);
        Vec2 k4 = flow_direction(x + h_step * k3);
        x += h_step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      return project_to_level(x, t_to);
    };
    // march from the mid column outward in both directions
    grid_.node[grid_.at(i_mid, static_cast<int>(js))] = seed[js];
    Vec2 x = seed[js];
    for (int i = i_mid + 1; i < n_t; ++i) {
      x = flow_to(x, grid_.t_nodes[i - 1], grid_.t_nodes[i]);
      grid_.node[grid_.at(i, static_cast<int>(js))] = x;
    }
    x = seed[js];
    for (int i = i_mid - 1; i >= 0; --i) {
      x = flow_to(x, grid_.t_nodes[i + 1], grid_.t_nodes[i]);
      grid_.node[grid_.at(i, static_cast<int>(js))] = x;
    }
  });

  // tangent field and rho at every node
  parallel_for(grid_.node.size(), [&](std::size_t idx) {
    const Vec2& x = grid_.node[idx];
    Vec2 W = flow_direction(x);
    grid_.rt_param[idx] = W;
    ChartJet jet = surface_.jet(x);
    double phi = surface_.ambient->eval(jet.d1 * Vec(W));
    grid_.rho[idx] = phi * phi;
  });
}

Vec CalibratorField::ambient_node(int it, int js) const {
  return surface_.jet(grid_.node[grid_.at(it, js)]).value;
}

Vec CalibratorField::ambient_rt(int it, int js) const {
  const Vec2& x = grid_.node[grid_.at(it, js)];
  return surface_.jet(x).d1 * Vec(grid_.rt_param[grid_.at(it, js)]);
}

RhoReport CalibratorField::verify_rho() const {
  RhoReport report;
  const int n_s = grid_.n_s;
  const double ds = s_max_ / n_s;
  report.rho_ss_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_.n_t; ++i) {
    double r0 = grid_.rho[grid_.at(i, n_s)];
    double rp = grid_.rho[grid_.at(i, n_s + 1)];
    double rm = grid_.rho[grid_.at(i, n_s - 1)];
    double rp2 = grid_.rho[grid_.at(i, n_s + 2)];
    double rm2 = grid_.rho[grid_.at(i, n_s - 2)];
    report.rho_on_axis_err = std::max(report.rho_on_axis_err, std::abs(r0 - 1.0));
    report.rho_s_max = std::max(report.rho_s_max, std::abs((rp - rm) / (2.0 * ds)));
    double d1 = (rp - 2.0 * r0 + rm) / (ds * ds);
    double d2 = (rp2 - 2.0 * r0 + rm2) / (4.0 * ds * ds);
    double dss = (4.0 * d1 - d2) / 3.0;  // Richardson
    report.rho_ss_min = std::min(report.rho_ss_min, dss);
  }
  return report;
}

double CalibratorField::max_dual_dg(double sigma) const {
  const int cols = grid_.cols();
  const double ds = s_max_ / grid_.n_s;
  std::vector<double> row_max(grid_.n_t, 0.0);
  parallel_for(static_cast<std::size_t>(grid_.n_t), [&](std::size_t i) {
    double worst = 0.0;
    for (int j = 0; j < cols; ++j) {
      const Vec2& x = grid_.node[grid_.at(static_cast<int>(i), j)];
      double t = grid_.t_nodes[i];
      double s = grid_.s_nodes[j];
      // d(g o r) in (t, s) coordinates for g = (1 - sigma s^2) h
      double g_t = 1.0 - sigma * s * s;
      double g_s = -2.0 * sigma * s * t;
      // pull back through dr = [r'_t | r'_s]
      Vec2 rt = grid_.rt_param[grid_.at(static_cast<int>(i), j)];
      Vec2 rs;
      if (j == 0)
        rs = (grid_.node[grid_.at(static_cast<int>(i), 1)] -
              grid_.node[grid_.at(static_cast<int>(i), 0)]) / ds;
      else if (j == cols - 1)
        rs = (grid_.node[grid_.at(static_cast<int>(i), cols - 1)] -
              grid_.node[grid_.at(static_cast<int>(i), cols - 2)]) / ds;
      else
        rs = (grid_.node[grid_.at(static_cast<int>(i), j + 1)] -
              grid_.node[grid_.at(static_cast<int>(i), j - 1)]) / (2.0 * ds);
      Mat2 dr;
      dr.col(0) = rt;
      dr.col(1) = rs;
      Vec2 dg_param = dr.transpose().fullPivLu().solve(Vec2(g_t, g_s));
      NormPtr phi = induced_metric(surface_, x);
      Covector dg(2);
      dg << dg_param[0], dg_param[1];
      worst = std::max(worst, dual_eval(*phi, dg));
    }
    row_max[i] = worst;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

CalibrationReport CalibratorField::calibrate_correct(int n_sigma, double sigma_lo,
                                                     double sigma_hi) const {
  CalibrationReport report;
  report.base_dual_max = max_dual_dg(0.0);
  std::vector<double> sigmas(n_sigma), values(n_sigma);
  for (int k = 0; k < n_sigma; ++k)
    sigmas[k] = sigma_lo * std::pow(sigma_hi / sigma_lo, k / (n_sigma - 1.0));
  parallel_for(static_cast<std::size_t>(n_sigma),
               [&](std::size_t k) { values[k] = max_dual_dg(sigmas[k]); });
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_sigma; ++k) {
    if (values[k] < best) {
      best = values[k];
      report.phi_star_dg_max = values[k];
    }
    if (!report.certified && values[k] <= 1.0 + 1e-9) {
      report.certified = true;
      report.sigma_witness = sigmas[k];
      report.phi_star_dg_max = values[k];
      break;
    }
  }
  if (!report.certified) report.phi_star_dg_max = best;
  return report;
}

CalibratorField make_calibrator(const ImmersedSurface& surface, const Vec2& x0, const Vec2& v0,
                                double interior_length, double dt, CalibratorOptions options) {
  double s_max = options.s_max > 0.0 ? options.s_max : 0.05 * interior_length;
  double ext = std::max(2.0 * s_max, 10.0 * dt);
  // walk backward by ext (norm symmetry makes the reversed path a geodesic)
  GeodesicPath back = shoot(surface, x0, Vec2(-v0), ext, dt);
  if (back.truncated) throw DomainError("make_calibrator: extension leaves the domain");
  const GeodesicSample& start = back.samples.back();
  GeodesicPath full =
      shoot(surface, start.c, Vec2(-start.cdot), interior_length + 2.0 * ext, dt);
  if (full.truncated) throw DomainError("make_calibrator: path leaves the domain");
  return CalibratorField(surface, std::move(full), ext, ext + interior_length, options);
}

std::string rho_grid_to_csv(const CalibratorGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "t,s,rho\n";
  for (int i = 0; i < grid.n_t; ++i)
    for (int j = 0; j < grid.cols(); ++j)
      out << grid.t_nodes[i] << ',' << grid.s_nodes[j] << ',' << grid.rho[grid.at(i, j)]
          << '\n';
  return out.str();
}

}  // namespace minkgeo
