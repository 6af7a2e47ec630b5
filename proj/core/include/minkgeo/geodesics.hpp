// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/surfaces.hpp"

#include <cstdint>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// Unit-speed geodesics on immersed surfaces. A curve c(t) in the parameter
// domain is a geodesic iff the curvature co-vector K = d/dt L_Phi(dS cdot)
// annihilates the tangent plane, which reduces to the 2x2 linear system
//
//   M cddot = b,  M_ij = Q(dS e_i, dS e_j),  b_i = -Q(d2S(cdot,cdot), dS e_i)
//
// with Q the half-Hessian of the ambient norm at the velocity. Quadratic
// convexity makes M positive definite.
// ---------------------------------------------------------------------------

struct GeodesicSample {
  double t = 0.0;                   // arclength parameter
  Vec2 c = Vec2::Zero();            // chart point
  Vec2 cdot = Vec2::Zero();         // chart velocity
  Vec2 cddot = Vec2::Zero();        // acceleration from the geodesic system
  double speed_residual = 0.0;      // |Phi(dS cdot) - 1|
  double tangency_residual = 0.0;   // max_i |<K, dS e_i>|, K by central FD
};

struct GeodesicPath {
  std::vector<GeodesicSample> samples;
  double step = 0.0;
  bool truncated = false;  // hit the domain boundary before reaching T

  double t_start() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
  double length() const { return t_end() - t_start(); }
  double max_speed_residual() const;
  double max_tangency_residual() const;

  /// Cubic Hermite interpolation of (c, cdot) between stored samples.
  void state_at(double t, Vec2& c, Vec2& cdot) const;
};

/// Acceleration of the geodesic system at (c, cdot). Throws NumericError when
/// the mass matrix is ill-conditioned (condition number > 1e8).
Vec2 geodesic_acceleration(const ImmersedSurface& surface, const Vec2& c, const Vec2& cdot);

/// Integrates the geodesic from x0 with initial direction v0 (normalized to
/// unit induced speed) for length T with fixed RK4 steps dt. Stops at the
/// domain boundary with the truncated flag set.
GeodesicPath shoot(const ImmersedSurface& surface, const Vec2& x0, const Vec2& v0, double T,
                   double dt);

struct ConnectOptions {
  double bvp_tol = 1e-8;       // endpoint tolerance in parameter distance
  int max_restarts = 20;
  double dt = 1e-3;
  std::uint64_t seed = 1;
};

struct ConnectResult {
  bool found = false;
  bool multiple = false;       // restarts produced distinct solutions
  int n_solutions = 0;
  GeodesicPath path;           // the shortest connecting geodesic
  double length = 0.0;
};

/// Two-point connection by shooting: bracketing + secant on the initial
/// direction angle, polished by a 2-variable Newton on (angle, length).
ConnectResult connect(const ImmersedSurface& surface, const Vec2& x0, const Vec2& x1,
                      const ConnectOptions& options = {});

/// Induced length of a chart polyline: composite Gauss-Legendre per segment,
/// panels doubled until the relative change is below 1e-9.
double length(const ImmersedSurface& surface, const std::vector<Vec2>& polyline);

struct CompetitorOptions {
  int multistarts = 64;
  int passes = 12;
  int proposals_per_node = 6;
  std::uint64_t seed = 1;
};

struct CompetitorResult {
  double best_length = 0.0;
  std::vector<Vec2> best_polyline;
  double geodesic_length = 0.0;
  // > 0 when a competitor is strictly shorter than the geodesic
  double gain() const { return geodesic_length - best_length; }
};

/// Searches for a shorter polyline with the geodesic's endpoints, interior
/// nodes confined to the parameter tube of radius tube_radius around the
/// path. Coordinate descent with annealed random proposals over multistarts
/// run in parallel; a refutation heuristic, never a certificate.
CompetitorResult competitor_search(const ImmersedSurface& surface, const GeodesicPath& path,
                                   double tube_radius, int n_nodes,
                                   const CompetitorOptions& options = {});

/// CSV: t,x,y,xdot,ydot,speed_residual,tangency_residual
std::string path_to_csv(const GeodesicPath& path);

}  // namespace minkgeo
