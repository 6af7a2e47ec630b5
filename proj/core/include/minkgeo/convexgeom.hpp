// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "minkgeo/geodesics.hpp"

#include <string>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// Planar normed perimeters, sharp-cone shortcuts, and the geodesic-line
// refutation experiment on complete strictly convex surfaces.
// ---------------------------------------------------------------------------

/// Sum of normed edge lengths of a closed polygon (the closing edge is
/// implicit).
double polygon_perimeter(const std::vector<Vec2>& polygon, const MinkowskiNorm& norm2);

/// Clips a convex polygon by the half-plane { x : <n, x> <= c }.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& polygon, const Vec2& n, double c);

struct MonotonicityReport {
  bool ok = false;
  double inner_perimeter = 0.0;
  double outer_perimeter = 0.0;
  double max_cut_increase = 0.0;  // worst perimeter growth over the cut replay
  int cuts = 0;
};

/// Checks len(inner) <= len(outer) for nested convex polygons and replays
/// the cut sequence (clip the outer body along each inner edge line),
/// asserting the perimeter never grows at any cut.
MonotonicityReport perimeter_monotonicity_check(const std::vector<Vec2>& inner,
                                                const std::vector<Vec2>& outer,
                                                const MinkowskiNorm& norm2);

// --------------------------------- cones -----------------------------------

/// K' = { x : <nu_i, x> >= 0, i = 1..3 } with apex at the origin. Sharp iff
/// the normals are linearly independent.
struct TrihedralCone {
  Vec3 nu1, nu2, nu3;
  bool is_sharp(double tol = 1e-10) const;
  /// Edge direction shared by faces i and j, oriented into the cone.
  Vec3 edge(int i, int j) const;
};

struct ConeShortcutResult {
  bool found = false;
  bool via_two_segment_line = false;  // the f'(0) > 0 branch
  std::vector<Vec3> path;             // [p, ..., q] on the cone boundary, planar
  double base_length = 0.0;           // len [p, 0, q]
  double length = 0.0;
  double margin = 0.0;                // base_length - length, must be > 0
  double fprime0 = 0.0;
};

/// A path on the boundary of the sharp cone connecting p and q, strictly
/// shorter than the broken line [p, 0, q] and contained in a plane.
/// Requires p on the face of nu1 and q on the face of nu2. Failure (margin
/// below 1e-12) signals a non-strict norm or degenerate cone.
ConeShortcutResult cone_shortcut(const MinkowskiNorm& norm3, const TrihedralCone& cone,
                                 const Vec3& p, const Vec3& q);

/// Outward vector of the f(t) construction: minus the edge shared by the
/// faces of nu1 and nu2.
Vec3 cone_outward_vector(const TrihedralCone& cone);

/// Derivatives at t = 0 of the intersection points of [p, vt] and [q, vt]
/// with the third face plane: v1 = v + (beta/<nu3,p>) p and similarly v2,
/// with beta = -<nu3, v>.
void cone_edge_velocities(const TrihedralCone& cone, const Vec3& p, const Vec3& q,
                          Vec3& v1, Vec3& v2);

/// Random sharp trihedral cone (normals spread around a common interior
/// direction) and random points on the faces of nu1 and nu2; the generators
/// behind the shortcut experiments.
TrihedralCone random_sharp_trihedral(std::mt19937_64& rng);
void random_face_points(const TrihedralCone& cone, std::mt19937_64& rng, Vec3& p, Vec3& q);

// ------------------------------- convex bodies -------------------------------

class ConvexBody3 {
 public:
  virtual ~ConvexBody3() = default;
  virtual bool inside(const Vec3& x) const = 0;
  virtual ChartPtr boundary_chart() const = 0;
  virtual Vec3 interior_anchor() const = 0;
  virtual std::string kind() const = 0;
};

/// { z >= sqrt(cap^2 + x^2 + y^2) }: strictly convex, asymptotic cone
/// z >= |(x,y)| (sharp, nonempty interior).
class CappedConeBody final : public ConvexBody3 {
 public:
  explicit CappedConeBody(double cap);
  bool inside(const Vec3& x) const override;
  ChartPtr boundary_chart() const override;
  Vec3 interior_anchor() const override;
  std::string kind() const override { return "capped_cone"; }
  double cap() const { return cap_; }

 private:
  double cap_;
};

/// { x^2 + y^2 <= 1 }: contains lines, so its asymptotic cone is not sharp.
class CylinderBody final : public ConvexBody3 {
 public:
  bool inside(const Vec3& x) const override;
  ChartPtr boundary_chart() const override;
  Vec3 interior_anchor() const override { return Vec3::Zero(); }
  std::string kind() const override { return "cylinder"; }
};

/// { |x| <= R }: compact, no geodesic line exists on a compact surface.
class BallBody final : public ConvexBody3 {
 public:
  explicit BallBody(double radius);
  bool inside(const Vec3& x) const override;
  ChartPtr boundary_chart() const override;
  Vec3 interior_anchor() const override { return Vec3::Zero(); }
  std::string kind() const override { return "ball"; }

 private:
  double radius_;
};

struct ConvexScene {
  NormPtr norm3;
  std::shared_ptr<const ConvexBody3> body;
};

std::string scene_to_json(const ConvexScene& scene);
ConvexScene scene_from_json(const std::string& text);

// ------------------------------- refutation --------------------------------

struct RefuteOptions {
  std::vector<double> lambdas = {2, 4, 8, 16, 32, 64, 128, 256};
  double dt = 1e-3;
  int n_arc = 512;           // polyline resolution of the planar section arcs
  Vec2 start = Vec2(0.03, 0.07);
  double start_angle = 0.4;
  std::uint64_t seed = 3;
};

struct RefuteReport {
  bool cone_sharp = false;
  bool cone_has_interior = false;
  bool inconclusive = true;
  bool refuted = false;
  double refuting_lambda = 0.0;
  double competitor_length = 0.0;     // vs geodesic length 2 after rescaling
  std::vector<Vec3> competitor;       // polyline on the rescaled surface
  ConeShortcutResult shortcut;        // on the fitted supporting trihedral cone
  std::string note;
};

/// Rescales the surface by 1/lambda, extracts the geodesic endpoints, and
/// measures the planar-section boundary arc through a fixed interior point
/// of the asymptotic cone; reports the first lambda whose arc is shorter
/// than the rescaled geodesic (length 2). Degenerate or line-containing
/// asymptotic cones are detected and reported as inconclusive.
RefuteReport geodesic_line_refute(const ConvexScene& scene, const RefuteOptions& options = {});

/// CSV: x,y,z per competitor vertex.
std::string competitor_to_csv(const std::vector<Vec3>& polyline);

}  // namespace minkgeo
