// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/geodesics.hpp"

#include "minkgeo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace minkgeo {

namespace {

// 4-point Gauss-Legendre rule on [0, 1]
constexpr double kGlNode[4] = {0.069431844202973712, 0.33000947820757187,
                               0.66999052179242813, 0.93056815579702629};
constexpr double kGlWeight[4] = {0.17392742256872693, 0.32607257743127307,
                                 0.32607257743127307, 0.17392742256872693};

double segment_length(const ImmersedSurface& surface, const Vec2& a, const Vec2& b,
                      int panels) {
  const Vec2 d = b - a;
  if (d.squaredNorm() == 0.0) return 0.0;
  double sum = 0.0;
  Vec dv(surface.ambient->dim());
  for (int p = 0; p < panels; ++p) {
    for (int g = 0; g < 4; ++g) {
      double s = (p + kGlNode[g]) / panels;
      ChartJet jet = surface.jet(a + s * d);
      dv = jet.d1 * Vec(d);
      sum += kGlWeight[g] / panels * surface.ambient->eval(dv);
    }
  }
  return sum;
}

double segment_length_adaptive(const ImmersedSurface& surface, const Vec2& a, const Vec2& b) {
  double prev = segment_length(surface, a, b, 1);
  for (int panels = 2; panels <= 256; panels *= 2) {
    double cur = segment_length(surface, a, b, panels);
    if (std::abs(cur - prev) <= 1e-9 * std::max(1e-300, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

double length(const ImmersedSurface& surface, const std::vector<Vec2>& polyline) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
    total += segment_length_adaptive(surface, polyline[i], polyline[i + 1]);
  return total;
}

// --------------------------------- shooting ---------------------------------

Vec2 geodesic_acceleration(const ImmersedSurface& surface, const Vec2& c, const Vec2& cdot) {
  ChartJet jet = surface.jet(c);
  Vec w = jet.d1 * Vec(cdot);
  if (w.squaredNorm() == 0.0)
    throw DomainError("geodesic_acceleration: zero velocity");
  Mat Q = half_hessian(*surface.ambient, w);
  Mat2 M;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      M(i, j) = jet.d1.col(i).dot(Q * jet.d1.col(j));
      M(j, i) = M(i, j);
    }
  Eigen::SelfAdjointEigenSolver<Mat2> eig(M);
  double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e8) {
    std::ostringstream msg;
    msg << "geodesic mass matrix ill-conditioned (eigenvalues " << lo << ", " << hi << ")";
    throw NumericError(msg.str());
  }
  Vec d2 = jet.dxx * (cdot[0] * cdot[0]) + jet.dxy * (2.0 * cdot[0] * cdot[1]) +
           jet.dyy * (cdot[1] * cdot[1]);
  Vec2 b;
  for (int i = 0; i < 2; ++i) b[i] = -d2.dot(Q * jet.d1.col(i));
  return M.ldlt().solve(b);
}

GeodesicPath shoot(const ImmersedSurface& surface, const Vec2& x0, const Vec2& v0, double T,
                   double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("shoot: T and dt must be positive");
  if (!surface.domain.contains(x0)) throw DomainError("shoot: start point outside domain");

  // normalize to unit induced speed
  NormPtr phi0 = induced_metric(surface, x0);
  double speed = phi0->eval(Vec(v0));
  if (!(speed > 0.0)) throw DomainError("shoot: zero initial direction");

  GeodesicPath path;
  path.step = dt;
  Vec2 c = x0;
  Vec2 cdot = v0 / speed;

  auto push_sample = [&](double t) {
    GeodesicSample s;
    s.t = t;
    s.c = c;
    s.cdot = cdot;
    s.cddot = geodesic_acceleration(surface, c, cdot);
    ChartJet jet = surface.jet(c);
    s.speed_residual = std::abs(surface.ambient->eval(jet.d1 * Vec(cdot)) - 1.0);
    path.samples.push_back(s);
  };
  push_sample(0.0);

  const int n_steps = static_cast<int>(std::llround(T / dt));
  for (int k = 0; k < n_steps; ++k) {
    // RK4 on (c, cdot)
    Vec2 k1c = cdot, k1v = path.samples.back().cddot;
    Vec2 c2 = c + 0.5 * dt * k1c, v2 = cdot + 0.5 * dt * k1v;
    if (!surface.domain.contains(c2)) { path.truncated = true; break; }
    Vec2 k2c = v2, k2v = geodesic_acceleration(surface, c2, v2);
    Vec2 c3 = c + 0.5 * dt * k2c, v3 = cdot + 0.5 * dt * k2v;
    if (!surface.domain.contains(c3)) { path.truncated = true; break; }
    Vec2 k3c = v3, k3v = geodesic_acceleration(surface, c3, v3);
    Vec2 c4 = c + dt * k3c, v4 = cdot + dt * k3v;
    if (!surface.domain.contains(c4)) { path.truncated = true; break; }
    Vec2 k4c = v4, k4v = geodesic_acceleration(surface, c4, v4);
    Vec2 c_next = c + dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    Vec2 v_next = cdot + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!surface.domain.contains(c_next)) { path.truncated = true; break; }
    c = c_next;
    cdot = v_next;
    push_sample((k + 1) * dt);
  }

  // tangency residual: K by central differences of the Legendre image of the
  // ambient velocity
  const std::size_t n = path.samples.size();
  if (n >= 3) {
    std::vector<Covector> L(n);
    std::vector<Mat> d1(n);
    for (std::size_t i = 0; i < n; ++i) {
      ChartJet jet = surface.jet(path.samples[i].c);
      d1[i] = jet.d1;
      L[i] = legendre(*surface.ambient, jet.d1 * Vec(path.samples[i].cdot));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      Covector K = (L[i + 1] - L[i - 1]) / (2.0 * dt);
      double r = std::max(std::abs(pair(K, d1[i].col(0))), std::abs(pair(K, d1[i].col(1))));
      path.samples[i].tangency_residual = r;
    }
    path.samples[0].tangency_residual = path.samples[1].tangency_residual;
    path.samples[n - 1].tangency_residual = path.samples[n - 2].tangency_residual;
  }
  return path;
}

double GeodesicPath::max_speed_residual() const {
  double r = 0.0;
  for (const auto& s : samples) r = std::max(r, s.speed_residual);
  return r;
}

double GeodesicPath::max_tangency_residual() const {
  double r = 0.0;
  for (const auto& s : samples) r = std::max(r, s.tangency_residual);
  return r;
}

void GeodesicPath::state_at(double t, Vec2& c, Vec2& cdot) const {
  const double t0 = samples.front().t;
  const double t1 = samples.back().t;
  double tc = std::clamp(t, t0, t1);
  std::size_t i = std::min<std::size_t>(
      samples.size() - 2, static_cast<std::size_t>(std::max(0.0, (tc - t0) / step)));
  const GeodesicSample& a = samples[i];
  const GeodesicSample& b = samples[i + 1];
  double h = b.t - a.t;
  double u = (tc - a.t) / h;
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  double h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u);
  double h11 = u * u * (u - 1);
  c = h00 * a.c + h10 * h * a.cdot + h01 * b.c + h11 * h * b.cdot;
  cdot = h00 * a.cdot + h10 * h * a.cddot + h01 * b.cdot + h11 * h * b.cddot;
}

// --------------------------------- connect ---------------------------------

namespace {

struct ShotMiss {
  double miss = std::numeric_limits<double>::infinity();  // signed lateral miss
  double closest_dist = std::numeric_limits<double>::infinity();
  double t_at_closest = 0.0;
  bool reached = false;
};

ShotMiss shot_miss(const ImmersedSurface& surface, const Vec2& x0, double theta,
                   const Vec2& x1, double T, double dt) {
  Vec2 dir(std::cos(theta), std::sin(theta));
  ShotMiss out;
  GeodesicPath path;
  try {
    path = shoot(surface, x0, dir, T, dt);
  } catch (const NumericError&) {
    return out;
  }
  for (const auto& s : path.samples) {
    double d = (s.c - x1).norm();
    if (d < out.closest_dist) {
      out.closest_dist = d;
      out.t_at_closest = s.t;
      double cross = s.cdot[0] * (x1 - s.c)[1] - s.cdot[1] * (x1 - s.c)[0];
      out.miss = cross;  // signed area: which side of the ray the target lies
    }
  }
  out.reached = out.closest_dist < 0.45 * (x1 - x0).norm() + 10 * dt;
  return out;
}

}  // namespace

ConnectResult connect(const ImmersedSurface& surface, const Vec2& x0, const Vec2& x1,
                      const ConnectOptions& options) {
  ConnectResult result;
  const double straight = length(surface, {x0, x1});
  const double T_max = 2.5 * straight + 20 * options.dt;
  const double dt = options.dt;

  struct Solution {
    double length = 0.0;       // converged arclength, not step-quantized
    double theta = 0.0;
    GeodesicPath path;
  };

  auto polish = [&](double theta, double T_guess) -> std::pair<bool, Solution> {
    // Newton on F(theta, T) = endpoint(theta, T) - x1 with FD Jacobian
    double th = theta, T = T_guess;
    for (int iter = 0; iter < 40; ++iter) {
      if (!(T > 2 * dt)) T = 2 * dt;
      GeodesicPath p_long =
          shoot(surface, x0, Vec2(std::cos(th), std::sin(th)), T + 10 * dt, dt);
      if (p_long.t_end() < T) T = std::max(2 * dt, p_long.t_end() - 5 * dt);
      Vec2 end, end_dot;
      p_long.state_at(T, end, end_dot);
      Vec2 F = end - x1;
      if (F.norm() <= options.bvp_tol) {
        Solution sol;
        sol.length = T;
        sol.theta = th;
        sol.path = std::move(p_long);
        return {true, std::move(sol)};
      }
      const double h_th = 1e-6, h_T = 1e-6;
      GeodesicPath p_th = shoot(surface, x0, Vec2(std::cos(th + h_th), std::sin(th + h_th)),
                                T + 10 * dt, dt);
      Vec2 e_th, e_T, tmp;
      p_th.state_at(T, e_th, tmp);
      p_long.state_at(T + h_T, e_T, tmp);
      Mat2 J;
      J.col(0) = (e_th - end) / h_th;
      J.col(1) = (e_T - end) / h_T;
      Vec2 delta = J.fullPivLu().solve(-F);
      double max_step = 0.5;
      if (delta.norm() > max_step) delta *= max_step / delta.norm();
      th += delta[0];
      T += delta[1];
    }
    return {false, Solution{}};
  };

  std::vector<Solution> solutions;
  auto try_root = [&](double theta, double t_guess) {
    auto [ok, sol] = polish(theta, t_guess);
    if (!ok) return;
    for (const Solution& s : solutions)
      if (std::abs(s.length - sol.length) <= options.bvp_tol &&
          std::abs(std::remainder(s.theta - sol.theta, 2.0 * std::numbers::pi)) < 1e-5)
        return;  // duplicate
    solutions.push_back(std::move(sol));
  };

  auto rng = make_rng(options.seed);
  for (int restart = 0; restart <= options.max_restarts && solutions.empty(); ++restart) {
    const int n_scan = 48;
    double offset = restart == 0
                        ? 0.0
                        : std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    std::vector<ShotMiss> scan(n_scan);
    std::vector<double> angles(n_scan);
    for (int k = 0; k < n_scan; ++k) {
      angles[k] = offset + 2.0 * std::numbers::pi * k / n_scan;
      scan[k] = shot_miss(surface, x0, angles[k], x1, T_max, dt);
    }
    for (int k = 0; k < n_scan; ++k) {
      const ShotMiss& a = scan[k];
      const ShotMiss& b = scan[(k + 1) % n_scan];
      if (!a.reached || !b.reached) continue;
      if (a.miss == 0.0) { try_root(angles[k], a.t_at_closest); continue; }
      if (a.miss * b.miss < 0.0) {
        // secant refinement of the sign change
        double lo = angles[k], hi = angles[k] + 2.0 * std::numbers::pi / n_scan;
        double m_lo = a.miss, m_hi = b.miss;
        double mid = lo, t_guess = a.t_at_closest;
        for (int it = 0; it < 40; ++it) {
          mid = lo - m_lo * (hi - lo) / (m_hi - m_lo);
          ShotMiss sm = shot_miss(surface, x0, mid, x1, T_max, dt);
          if (!sm.reached) break;
          t_guess = sm.t_at_closest;
          if (std::abs(sm.miss) < 1e-14 || hi - lo < 1e-13) break;
          if (sm.miss * m_lo < 0.0) { hi = mid; m_hi = sm.miss; }
          else { lo = mid; m_lo = sm.miss; }
        }
        try_root(mid, t_guess);
      }
    }
  }

  // look for additional solutions from random restarts (conjugate-point probe)
  for (int restart = 0; restart < options.max_restarts && !solutions.empty(); ++restart) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    double theta = u(rng);
    ShotMiss sm = shot_miss(surface, x0, theta, x1, T_max, dt);
    if (sm.reached && sm.closest_dist < 0.2 * straight + 20 * dt)
      try_root(theta, sm.t_at_closest);
  }

  if (solutions.empty()) return result;
  std::sort(solutions.begin(), solutions.end(),
            [](const Solution& a, const Solution& b) { return a.length < b.length; });
  result.found = true;
  result.n_solutions = static_cast<int>(solutions.size());
  result.multiple = solutions.size() > 1 &&
                    solutions.back().length - solutions.front().length > options.bvp_tol;
  result.length = solutions.front().length;
  result.path = std::move(solutions.front().path);
  return result;
}

// ----------------------------- competitor search -----------------------------

CompetitorResult competitor_search(const ImmersedSurface& surface, const GeodesicPath& path,
                                   double tube_radius, int n_nodes,
                                   const CompetitorOptions& options) {
  if (n_nodes < 3) throw ConfigError("competitor_search: need at least 3 nodes");
  CompetitorResult result;

  std::vector<Vec2> base(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    double t = path.t_start() + path.length() * i / (n_nodes - 1.0);
    Vec2 c, cdot;
    path.state_at(t, c, cdot);
    base[i] = c;
  }
  result.geodesic_length = length(surface, base);

  // cheap localized objective used inside the descent
  auto seg_len = [&](const Vec2& a, const Vec2& b) { return segment_length(surface, a, b, 2); };

  struct StartResult {
    double len = std::numeric_limits<double>::infinity();
    std::vector<Vec2> nodes;
  };
  std::vector<StartResult> runs(options.multistarts);

  parallel_for(runs.size(), [&](std::size_t r) {
    auto rng = make_rng(options.seed, r);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec2> nodes = base;
    auto clamp_to_tube = [&](int i, Vec2 p) {
      Vec2 d = p - base[i];
      double n = d.norm();
      if (n > tube_radius) p = base[i] + d * (tube_radius / n);
      return p;
    };
    if (r >= 1 && r <= 8) {
      // transverse bump modes: collective seeds that single-node descent
      // cannot reach from the geodesic itself (conjugate-point shortcuts)
      int halfwaves = static_cast<int>(r + 1) / 2;
      double amp = tube_radius * (r % 2 ? 0.85 : -0.85);
      for (int i = 1; i + 1 < n_nodes; ++i) {
        Vec2 tang = base[i + 1] - base[i - 1];
        if (tang.norm() < 1e-14) continue;
        tang.normalize();
        Vec2 perp(-tang[1], tang[0]);
        double frac = i / (n_nodes - 1.0);
        nodes[i] = clamp_to_tube(
            i, nodes[i] + amp * std::sin(std::numbers::pi * halfwaves * frac) * perp);
      }
    } else if (r != 0) {
      double amp = tube_radius * (0.2 + 0.8 * static_cast<double>(r) / runs.size());
      for (int i = 1; i + 1 < n_nodes; ++i)
        nodes[i] = clamp_to_tube(i, nodes[i] + amp * Vec2(gauss(rng), gauss(rng)));
    }
    std::vector<double> seg(n_nodes - 1);
    for (int i = 0; i + 1 < n_nodes; ++i) seg[i] = seg_len(nodes[i], nodes[i + 1]);
    for (int pass = 0; pass < options.passes; ++pass) {
      double step = tube_radius * std::pow(0.5, pass);
      for (int i = 1; i + 1 < n_nodes; ++i) {
        for (int k = 0; k < options.proposals_per_node; ++k) {
          Vec2 cand = clamp_to_tube(i, nodes[i] + step * Vec2(gauss(rng), gauss(rng)));
          if (!surface.domain.contains(cand)) continue;
          double s0 = seg_len(nodes[i - 1], cand);
          double s1 = seg_len(cand, nodes[i + 1]);
          if (s0 + s1 < seg[i - 1] + seg[i]) {
            nodes[i] = cand;
            seg[i - 1] = s0;
            seg[i] = s1;
          }
        }
      }
    }
    runs[r].nodes = std::move(nodes);
    runs[r].len = 0.0;
    for (int i = 0; i + 1 < n_nodes; ++i) runs[r].len += seg[i];
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].len < runs[best].len) best = r;
  result.best_polyline = runs[best].nodes;
  result.best_length = length(surface, result.best_polyline);
  // the baseline polyline itself is an admissible competitor
  if (result.geodesic_length < result.best_length) {
    result.best_length = result.geodesic_length;
    result.best_polyline = base;
  }
  result.geodesic_length = path.length();
  return result;
}

std::string path_to_csv(const GeodesicPath& path) {
  std::ostringstream out;
  out.precision(17);
  out << "t,x,y,xdot,ydot,speed_residual,tangency_residual\n";
  for (const auto& s : path.samples)
    out << s.t << ',' << s.c[0] << ',' << s.c[1] << ',' << s.cdot[0] << ',' << s.cdot[1] << ','
        << s.speed_residual << ',' << s.tangency_residual << '\n';
  return out.str();
}

}  // namespace minkgeo
