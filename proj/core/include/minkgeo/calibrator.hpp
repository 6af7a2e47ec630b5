// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/geodesics.hpp"

#include <optional>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// The implicit calibrator of an embedded geodesic gamma on a saddle surface.
// h(x) is the parameter t solving
//
//   < L_Phi(gamma_dot_S(t)), S(x) - gamma_S(t) > = 0,
//
// which pins x to the Legendre-orthogonal slice through gamma(t). Along the
// geodesic, dh equals the Legendre image of the velocity and phi*(dh) = 1;
// the special (t,s) grid r(t,s) flows the rescaled gradient field of h from
// an arclength-parameterized level line, so that
//
//   (1) r(t,0) = gamma(t),  (2) h(r(t,s)) = t,
//   (3) r'_t is proportional to the inverse Legendre image of dh.
//
// rho(t,s) = Phi^2(r'_t) then measures the calibration defect: on a strictly
// saddle surface rho'_s(t,0) = 0 and rho''_ss(t,0) >= 0, and the corrected
// g = (1 - sigma s^2) h becomes a genuine calibrator for some sigma > 0.
// ---------------------------------------------------------------------------

struct CalibratorOptions {
  double s_max = -1.0;       // tube half-width; default 0.05 * (b - a)
  int n_t = 33;              // t-nodes across [a, b]
  int n_s = 10;              // s-nodes per side of the geodesic
  double newton_tol = 1e-11; // residual tolerance of the implicit solve
  int flow_substeps = 4;     // RK4 substeps per t-node spacing
};

struct CalibratorGrid {
  std::vector<double> t_nodes;   // size n_t
  std::vector<double> s_nodes;   // size 2*n_s+1, ascending, 0 at index n_s
  std::vector<Vec2> node;        // parameter points, row-major [it][js]
  std::vector<Vec2> rt_param;    // r'_t at the node (exact flow field)
  std::vector<double> rho;       // Phi^2 of the ambient r'_t
  int n_t = 0, n_s = 0;
  int cols() const { return 2 * n_s + 1; }
  std::size_t at(int it, int js) const {
    return static_cast<std::size_t>(it) * cols() + js;
  }
};

struct RhoReport {
  double rho_s_max = 0.0;   // max_t |rho'_s(t, 0)|
  double rho_ss_min = 0.0;  // min_t rho''_ss(t, 0)
  double rho_on_axis_err = 0.0;  // max_t |rho(t,0) - 1|
};

struct CalibrationReport {
  bool certified = false;
  double sigma_witness = 0.0;    // first sigma with max phi*(dg) <= 1 + 1e-9
  double phi_star_dg_max = 0.0;  // at the witness, or the best attempt
  double base_dual_max = 0.0;    // max phi*(dh) over the tube
};

class CalibratorField {
 public:
  /// The path must extend beyond [a, b] on both sides; [a, b] is the
  /// certified interior. Throws DomainError when the path self-intersects
  /// (the construction requires an embedded geodesic).
  CalibratorField(ImmersedSurface surface, GeodesicPath path, double a, double b,
                  CalibratorOptions options = {});

  const ImmersedSurface& surface() const { return surface_; }
  const GeodesicPath& path() const { return path_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double s_max() const { return s_max_; }
  const CalibratorGrid& grid() const { return grid_; }

  /// Interpolated geodesic state and its Legendre data at parameter t.
  struct State {
    Vec2 c, cdot;
    Vec gamma_S;     // ambient position
    Vec gamma_dot_S; // ambient velocity
    Covector L;      // Legendre image of the ambient velocity
    Covector K;      // curvature co-vector d/dt L
  };
  State state(double t) const;

  /// The implicit solve; Newton seeded at the nearest sample, residual below
  /// options.newton_tol. Throws DomainError when the iterate leaves the
  /// extended parameter range.
  double h_eval(const Vec2& x) const;

  /// Gradient of h by implicit differentiation, as a covector on the chart.
  Covector dh_eval(const Vec2& x) const;

  /// Parameter-space gradient flow direction W = V / <dh, V> with
  /// V = inverse Legendre of dh in the induced metric; dh(W) = 1.
  Vec2 flow_direction(const Vec2& x) const;

  /// Central differences of rho across the grid at s = 0 (Richardson for the
  /// second derivative).
  RhoReport verify_rho() const;

  /// max over the grid of phi*(dg) for g = (1 - sigma s^2) h.
  double max_dual_dg(double sigma) const;

  /// Logarithmic sigma sweep; certification means some sigma keeps
  /// max phi*(dg) <= 1 + 1e-9 over the tube.
  CalibrationReport calibrate_correct(int n_sigma = 25, double sigma_lo = 1e-4,
                                      double sigma_hi = 1.0) const;

  /// Ambient grid point and ambient r'_t at a node (for curvature identities).
  Vec ambient_node(int it, int js) const;
  Vec ambient_rt(int it, int js) const;

 private:
  void build_grid();
  Vec2 level_direction(const Vec2& x, const Vec2& orientation) const;
  Vec2 project_to_level(Vec2 x, double t_target) const;

  ImmersedSurface surface_;
  GeodesicPath path_;
  double a_, b_;
  CalibratorOptions options_;
  double s_max_;
  CalibratorGrid grid_;
};

/// Shoots the extension (backward ext, forward length + ext) from x0 along
/// v0 and assembles the field with [a, b] the interior window of length
/// `interior_length`.
CalibratorField make_calibrator(const ImmersedSurface& surface, const Vec2& x0, const Vec2& v0,
                                double interior_length, double dt,
                                CalibratorOptions options = {});

/// rho grid as CSV: t,s,rho
std::string rho_grid_to_csv(const CalibratorGrid& grid);

}  // namespace minkgeo
