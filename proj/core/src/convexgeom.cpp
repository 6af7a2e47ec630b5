// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/convexgeom.hpp"

#include "minkgeo/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>
#include <sstream>

namespace minkgeo {

using nlohmann::json;

// ------------------------------- perimeters --------------------------------

double polygon_perimeter(const std::vector<Vec2>& polygon, const MinkowskiNorm& norm2) {
  if (polygon.size() < 3) throw ConfigError("polygon_perimeter: need at least 3 vertices");
  if (norm2.dim() != 2) throw ConfigError("polygon_perimeter: need a 2D norm");
  double total = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    Vec2 d = polygon[(i + 1) % polygon.size()] - polygon[i];
    Vec dv(2);
    dv << d[0], d[1];
    total += norm2.eval(dv);
  }
  return total;
}

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& polygon, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const std::size_t m = polygon.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % m];
    double da = n.dot(a) - c;
    double db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db <= 0.0)) {
      double s = da / (da - db);
      out.push_back(a + s * (b - a));
    }
  }
  // drop duplicate vertices produced by points exactly on the cut line
  std::vector<Vec2> dedup;
  for (const Vec2& p : out)
    if (dedup.empty() || (p - dedup.back()).norm() > 1e-14) dedup.push_back(p);
  if (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-14) dedup.pop_back();
  return dedup;
}

namespace {

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : poly) c += p;
  return c / static_cast<double>(poly.size());
}

bool point_in_convex(const std::vector<Vec2>& poly, const Vec2& x, double tol) {
  // consistent-side test; assumes a convex polygon in either orientation
  double sign = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
    double cr = e[0] * (x - poly[i])[1] - e[1] * (x - poly[i])[0];
    if (std::abs(cr) <= tol) continue;
    if (sign == 0.0)
      sign = cr;
    else if (sign * cr < 0.0)
      return false;
  }
  return true;
}

}  // namespace

MonotonicityReport perimeter_monotonicity_check(const std::vector<Vec2>& inner,
                                                const std::vector<Vec2>& outer,
                                                const MinkowskiNorm& norm2) {
  MonotonicityReport report;
  double scale = 0.0;
  for (const Vec2& p : outer) scale = std::max(scale, p.norm());
  for (const Vec2& p : inner)
    if (!point_in_convex(outer, p, 1e-12 * (1.0 + scale)))
      throw ConfigError("perimeter_monotonicity_check: inner polygon is not contained");

  report.inner_perimeter = polygon_perimeter(inner, norm2);
  report.outer_perimeter = polygon_perimeter(outer, norm2);

  Vec2 centroid = polygon_centroid(inner);
  std::vector<Vec2> current = outer;
  double prev = report.outer_perimeter;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const Vec2& a = inner[i];
    const Vec2& b = inner[(i + 1) % inner.size()];
    Vec2 e = b - a;
    Vec2 n(-e[1], e[0]);
    double c = n.dot(a);
    if (n.dot(centroid) > c) {
      n = -n;
      c = -c;
    }
    current = clip_halfplane(current, n, c);
    if (current.size() < 3) break;
    double per = polygon_perimeter(current, norm2);
    report.max_cut_increase = std::max(report.max_cut_increase, per - prev);
    prev = per;
    ++report.cuts;
  }
  report.ok = report.inner_perimeter <= report.outer_perimeter + 1e-10 &&
              report.max_cut_increase <= 1e-10;
  return report;
}

// --------------------------------- cones -----------------------------------

bool TrihedralCone::is_sharp(double tol) const {
  Eigen::Matrix3d N;
  N.col(0) = nu1;
  N.col(1) = nu2;
  N.col(2) = nu3;
  double scale = nu1.norm() * nu2.norm() * nu3.norm();
  return std::abs(N.determinant()) > tol * std::max(scale, 1e-300);
}

Vec3 TrihedralCone::edge(int i, int j) const {
  const Vec3* nus[3] = {&nu1, &nu2, &nu3};
  if (i < 1 || i > 3 || j < 1 || j > 3 || i == j)
    throw ConfigError("TrihedralCone::edge: face indices must be distinct in 1..3");
  Vec3 d = nus[i - 1]->cross(*nus[j - 1]);
  int k = 6 - i - j;  // the remaining face
  if (nus[k - 1]->dot(d) < 0.0) d = -d;
  double n = d.norm();
  if (n < 1e-14) throw NumericError("TrihedralCone::edge: parallel face normals");
  return d / n;
}

Vec3 cone_outward_vector(const TrihedralCone& cone) { return -cone.edge(1, 2); }

void cone_edge_velocities(const TrihedralCone& cone, const Vec3& p, const Vec3& q, Vec3& v1,
                          Vec3& v2) {
  Vec3 v = cone_outward_vector(cone);
  double beta = -cone.nu3.dot(v);
  v1 = v + (beta / cone.nu3.dot(p)) * p;
  v2 = v + (beta / cone.nu3.dot(q)) * q;
}

namespace {

double golden_minimize(double lo, double hi, const std::function<double(double)>& f,
                       int iters = 80) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters; ++it) {
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
}

}  // namespace

ConeShortcutResult cone_shortcut(const MinkowskiNorm& norm3, const TrihedralCone& cone,
                                 const Vec3& p, const Vec3& q) {
  if (norm3.dim() != 3) throw ConfigError("cone_shortcut: need a 3D norm");
  if (!cone.is_sharp()) throw ConfigError("cone_shortcut: cone is not sharp");
  const double scale = std::max(p.norm(), q.norm());
  if (!(scale > 0.0)) throw DomainError("cone_shortcut: p, q must be nonzero");
  auto on_cone = [&](const Vec3& x) {
    double tol = 1e-8 * (1.0 + x.norm());
    return cone.nu1.dot(x) >= -tol && cone.nu2.dot(x) >= -tol && cone.nu3.dot(x) >= -tol;
  };
  if (!on_cone(p) || std::abs(cone.nu1.dot(p)) > 1e-8 * scale * cone.nu1.norm())
    throw DomainError("cone_shortcut: p must lie on the face of nu1");
  if (!on_cone(q) || std::abs(cone.nu2.dot(q)) > 1e-8 * scale * cone.nu2.norm())
    throw DomainError("cone_shortcut: q must lie on the face of nu2");

  ConeShortcutResult out;
  auto nn = [&](const Vec3& x) { return norm3.eval(Vec(x)); };
  out.base_length = nn(p) + nn(q);

  if ((p - q).norm() < 1e-14 * scale) {
    // p = q: the constant path, trivially shorter than [p, 0, q]
    out.found = true;
    out.path = {p, q};
    out.length = 0.0;
    out.margin = out.base_length;
    return out;
  }

  const Vec3 v = cone_outward_vector(cone);
  auto dnorm_along = [&](const Vec3& x, const Vec3& dir) {
    Covector L = legendre(norm3, Vec(x));
    return pair(L, Vec(dir)) / nn(x);
  };
  out.fprime0 = -dnorm_along(p, v) - dnorm_along(q, v);

  if (out.fprime0 > 0.0) {
    // two-segment broken line through the edge ray [p, -v t, q]
    auto m = [&](double t) { return nn(p + t * v) + nn(q + t * v); };
    double hi = 0.05 * scale;
    while (m(2.0 * hi) < m(hi) && hi < 100.0 * scale) hi *= 2.0;
    double t_star = golden_minimize(0.0, 2.0 * hi, m);
    out.via_two_segment_line = true;
    out.path = {p, -t_star * v, q};
    out.length = m(t_star);
  } else {
    // route through the third face: [p, a(t), b(t), q]
    const double ap = cone.nu3.dot(p), aq = cone.nu3.dot(q);
    const double beta = -cone.nu3.dot(v);
    if (!(ap > 0.0) || !(aq > 0.0) || !(beta > 0.0))
      throw NumericError("cone_shortcut: third face does not separate the edge");
    auto point_a = [&](double t) {
      double s = ap / (ap + t * beta);
      return Vec3(p + s * (t * v - p));
    };
    auto point_b = [&](double t) {
      double s = aq / (aq + t * beta);
      return Vec3(q + s * (t * v - q));
    };
    auto g = [&](double t) {
      Vec3 a = point_a(t), b = point_b(t);
      return nn(p - a) + nn(a - b) + nn(b - q);
    };
    double t_first = -1.0;
    for (double t = 1e-5 * scale; t <= 1e3 * scale; t *= 1.25) {
      if (g(t) < out.base_length) {
        t_first = t;
        break;
      }
    }
    if (t_first < 0.0) return out;  // margin stays 0, found stays false
    double t_star = golden_minimize(t_first / 1.25, t_first * 8.0, g);
    if (g(t_star) > g(t_first)) t_star = t_first;
    out.path = {p, point_a(t_star), point_b(t_star), q};
    out.length = g(t_star);
  }
  out.margin = out.base_length - out.length;
  out.found = out.margin > 1e-12;
  return out;
}

TrihedralCone random_sharp_trihedral(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    double base = 2.0 * std::numbers::pi * u(rng);
    // mix narrow and wide cones; wide ones exercise the third-face route
    double spread = 0.4 + 0.9 * u(rng);
    TrihedralCone cone;
    Vec3* nus[3] = {&cone.nu1, &cone.nu2, &cone.nu3};
    for (int i = 0; i < 3; ++i) {
      double phi = base + 2.0 * std::numbers::pi * i / 3.0 +
                   0.6 * (u(rng) - 0.5);
      double tilt = spread * (0.7 + 0.6 * u(rng));
      *nus[i] = Vec3(tilt * std::cos(phi), tilt * std::sin(phi), 1.0).normalized();
    }
    if (cone.is_sharp(1e-3)) return cone;
  }
  throw NumericError("random_sharp_trihedral: generation failed");
}

void random_face_points(const TrihedralCone& cone, std::mt19937_64& rng, Vec3& p, Vec3& q) {
  std::uniform_real_distribution<double> edgeward(0.02, 1.0);
  std::uniform_real_distribution<double> outward(0.2, 1.4);
  p = edgeward(rng) * cone.edge(1, 2) + outward(rng) * cone.edge(1, 3);
  q = edgeward(rng) * cone.edge(1, 2) + outward(rng) * cone.edge(2, 3);
}

// ------------------------------- convex bodies -------------------------------

CappedConeBody::CappedConeBody(double cap) : cap_(cap) {
  if (!(cap > 0.0)) throw ConfigError("capped cone body: cap must be positive");
}

bool CappedConeBody::inside(const Vec3& x) const {
  return x[2] >= std::sqrt(cap_ * cap_ + x[0] * x[0] + x[1] * x[1]);
}

ChartPtr CappedConeBody::boundary_chart() const {
  return std::make_shared<CappedConeChart>(cap_);
}

Vec3 CappedConeBody::interior_anchor() const { return Vec3(0, 0, 2.0 * cap_); }

bool CylinderBody::inside(const Vec3& x) const {
  return x[0] * x[0] + x[1] * x[1] <= 1.0;
}

ChartPtr CylinderBody::boundary_chart() const { return std::make_shared<CylinderChart>(); }

BallBody::BallBody(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw ConfigError("ball body: radius must be positive");
}

bool BallBody::inside(const Vec3& x) const { return x.norm() <= radius_; }

ChartPtr BallBody::boundary_chart() const { return std::make_shared<SphereChart>(radius_); }

std::string scene_to_json(const ConvexScene& scene) {
  json j;
  j["norm3"] = json::parse(norm_to_json(*scene.norm3));
  json body;
  body["kind"] = scene.body->kind();
  if (const auto* c = dynamic_cast<const CappedConeBody*>(scene.body.get()))
    body["cap"] = c->cap();
  j["body"] = body;
  return j.dump();
}

ConvexScene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scene JSON parse error: ") + e.what());
  }
  ConvexScene scene;
  scene.norm3 = norm_from_json(j.at("norm3").dump());
  if (scene.norm3->dim() != 3) throw ConfigError("scene: norm3 must be 3-dimensional");
  const std::string kind = j.at("body").at("kind").get<std::string>();
  if (kind == "capped_cone")
    scene.body = std::make_shared<CappedConeBody>(j["body"].value("cap", 1.0));
  else if (kind == "cylinder")
    scene.body = std::make_shared<CylinderBody>();
  else if (kind == "ball")
    scene.body = std::make_shared<BallBody>(j["body"].value("radius", 1.0));
  else
    throw ConfigError("unknown body kind: " + kind);
  return scene;
}

// ------------------------------- refutation --------------------------------

namespace {

struct SectionArc {
  bool finite = false;
  std::vector<Vec3> points;
  double length = 0.0;
};

// boundary radius of the rescaled body along the in-plane ray from o, by
// bisection on the inside predicate; returns +inf for recession directions
double section_radius(const ConvexBody3& body, double lambda, const Vec3& o, const Vec3& dir,
                      double r_cap) {
  auto inside = [&](double r) { return body.inside(lambda * (o + r * dir)); };
  if (!inside(0.0)) return -1.0;
  double hi = 1.0;
  while (inside(hi)) {
    hi *= 2.0;
    if (hi > r_cap) return std::numeric_limits<double>::infinity();
  }
  double lo = hi * 0.5 > 1.0 ? hi * 0.5 : 0.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (inside(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SectionArc trace_arc(const ConvexScene& scene, double lambda, const Vec3& o, const Vec3& E1,
                     const Vec3& E2, double theta_q, const Vec3& P, const Vec3& Q, int n_arc,
                     int direction) {
  SectionArc arc;
  double span = direction > 0 ? theta_q : theta_q - 2.0 * std::numbers::pi;
  if (direction > 0 && theta_q < 0.0) span = theta_q + 2.0 * std::numbers::pi;
  const double r_cap = 16.0 * (P.norm() + Q.norm() + o.norm() + 1.0);
  arc.points.push_back(P);
  for (int k = 1; k < n_arc; ++k) {
    double theta = span * k / n_arc;
    Vec3 d = std::cos(theta) * E1 + std::sin(theta) * E2;
    double r = section_radius(*scene.body, lambda, o, d, r_cap);
    if (!(r >= 0.0) || !std::isfinite(r)) return arc;  // unbounded or invalid
    arc.points.push_back(o + r * d);
  }
  arc.points.push_back(Q);
  arc.finite = true;
  for (std::size_t i = 0; i + 1 < arc.points.size(); ++i)
    arc.length += scene.norm3->eval(Vec(arc.points[i + 1] - arc.points[i]));
  return arc;
}

Vec3 chart_outward_normal(const ConvexBody3& body, const Chart& chart, const Vec2& param) {
  ChartJet jet = chart.jet(param);
  Vec3 sx = jet.d1.col(0), sy = jet.d1.col(1);
  Vec3 n = sx.cross(sy).normalized();
  Vec3 x(jet.value[0], jet.value[1], jet.value[2]);
  if (body.inside(x + 1e-6 * n)) n = -n;  // outward: stepping out leaves the body
  return n;
}

}  // namespace

RefuteReport geodesic_line_refute(const ConvexScene& scene, const RefuteOptions& options) {
  RefuteReport report;
  const ConvexBody3& body = *scene.body;
  const Vec3 anchor = body.interior_anchor();

  // recession directions probe the asymptotic cone; the coordinate axes are
  // included so that hairline recession sets (cylinders) are not missed
  std::vector<Vec> probe = direction_grid(3, 1000);
  for (int i = 0; i < 3; ++i)
    for (double s : {1.0, -1.0}) {
      Vec e = Vec::Zero(3);
      e[i] = s;
      probe.push_back(e);
    }
  std::vector<Vec3> recession;
  for (const Vec& d : probe) {
    Vec3 d3(d[0], d[1], d[2]);
    if (body.inside(anchor + 1e5 * d3)) recession.push_back(d3);
  }
  if (recession.empty()) {
    report.note = "compact body: no asymptotic cone";
    return report;
  }
  report.cone_has_interior = recession.size() >= 10;
  report.cone_sharp = true;
  for (std::size_t i = 0; i < recession.size() && report.cone_sharp; ++i)
    for (std::size_t j = i; j < recession.size(); ++j)
      if (recession[i].dot(recession[j]) < -0.999) {
        report.cone_sharp = false;
        break;
      }
  if (!report.cone_sharp) {
    report.note = "asymptotic cone contains a line (cylinder-like body)";
    return report;
  }
  if (!report.cone_has_interior) {
    report.note = "asymptotic cone is degenerate (planar case, not handled)";
    return report;
  }

  Vec3 mean_dir = Vec3::Zero();
  for (const Vec3& d : recession) mean_dir += d;
  mean_dir.normalize();
  const Vec3 o = 0.75 * mean_dir;

  const double lambda_max = *std::max_element(options.lambdas.begin(), options.lambdas.end());
  ImmersedSurface surface;
  surface.ambient = scene.norm3;
  surface.chart = body.boundary_chart();
  double extent = 1.1 * lambda_max + 10.0;
  surface.domain = {-extent, extent, -extent, extent};

  Vec2 v0(std::cos(options.start_angle), std::sin(options.start_angle));
  GeodesicPath plus = shoot(surface, options.start, v0, lambda_max + 1.0, options.dt);
  GeodesicPath minus = shoot(surface, options.start, Vec2(-v0), lambda_max + 1.0, options.dt);

  auto rescaled_endpoint = [&](const GeodesicPath& path, double lambda) {
    Vec2 c, cdot;
    path.state_at(lambda, c, cdot);
    Vec x = surface.jet(c).value;
    return Vec3(x[0] / lambda, x[1] / lambda, x[2] / lambda);
  };

  std::vector<double> lambdas = options.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  for (double lambda : lambdas) {
    if (lambda > plus.t_end() || lambda > minus.t_end()) continue;
    if (!body.inside(lambda * o)) continue;
    Vec3 P = rescaled_endpoint(plus, lambda);
    Vec3 Q = rescaled_endpoint(minus, lambda);
    Vec3 E1 = (P - o).normalized();
    Vec3 raw = (Q - o) - (Q - o).dot(E1) * E1;
    if (raw.norm() < 1e-10) continue;  // degenerate section plane
    Vec3 E2 = raw.normalized();
    double theta_q = std::atan2((Q - o).dot(E2), (Q - o).dot(E1));
    SectionArc best;
    for (int dir : {+1, -1}) {
      SectionArc arc = trace_arc(scene, lambda, o, E1, E2, theta_q, P, Q, options.n_arc, dir);
      if (arc.finite && (!best.finite || arc.length < best.length)) best = arc;
    }
    if (best.finite && best.length < 2.0 - 1e-9) {
      report.refuted = true;
      report.inconclusive = false;
      report.refuting_lambda = lambda;
      report.competitor_length = best.length;
      report.competitor = best.points;
      break;
    }
  }

  // supporting trihedral cone of the asymptotic cone at the limit endpoints,
  // and the shortcut on it
  const double lam = lambda_max;
  if (lam <= plus.t_end() && lam <= minus.t_end()) {
    Vec2 cp, cq, tmp;
    plus.state_at(lam, cp, tmp);
    minus.state_at(lam, cq, tmp);
    Vec3 P = rescaled_endpoint(plus, lam);
    Vec3 Q = rescaled_endpoint(minus, lam);
    Vec3 n1 = -chart_outward_normal(body, *surface.chart, cp);  // inward
    Vec3 n2 = -chart_outward_normal(body, *surface.chart, cq);
    // third supporting plane: farthest boundary point from the line n1 x n2
    Vec3 line_dir = n1.cross(n2);
    if (line_dir.norm() > 1e-12) {
      line_dir.normalize();
      double best_dist = -1.0;
      Vec2 best_param;
      double R_par = std::max(cp.norm(), cq.norm());
      for (int k = 0; k < 64; ++k) {
        double theta = 2.0 * std::numbers::pi * k / 64;
        Vec2 param(R_par * std::cos(theta), R_par * std::sin(theta));
        if (!surface.domain.contains(param)) continue;
        Vec xv = surface.jet(param).value;
        Vec3 x(xv[0] / lam, xv[1] / lam, xv[2] / lam);
        auto dist_t = [&](double t) { return scene.norm3->eval(Vec(Vec3(x - t * line_dir))); };
        double t_best = golden_minimize(-10.0 * x.norm() - 1.0, 10.0 * x.norm() + 1.0, dist_t);
        double dist = dist_t(t_best);
        if (dist > best_dist) {
          best_dist = dist;
          best_param = param;
        }
      }
      Vec3 n3 = -chart_outward_normal(body, *surface.chart, best_param);
      if (std::abs(n3.dot(line_dir)) > 1e-8) {
        TrihedralCone cone{n1, n2, n3};
        if (cone.is_sharp()) {
          Vec3 p_face = P - (n1.dot(P) / n1.squaredNorm()) * n1;
          Vec3 q_face = Q - (n2.dot(Q) / n2.squaredNorm()) * n2;
          try {
            report.shortcut = cone_shortcut(*scene.norm3, cone, p_face, q_face);
          } catch (const std::exception& e) {
            report.note += std::string("shortcut skipped: ") + e.what();
          }
        }
      }
    }
  }

  if (!report.refuted && report.note.empty())
    report.note = "no refuting lambda found up to the configured maximum";
  return report;
}

std::string competitor_to_csv(const std::vector<Vec3>& polyline) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,z\n";
  for (const Vec3& p : polyline) out << p[0] << ',' << p[1] << ',' << p[2] << '\n';
  return out.str();
}

}  // namespace minkgeo
