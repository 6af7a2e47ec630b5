// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/calibrator.hpp"

#include <doctest.h>

#include <cmath>

using namespace minkgeo;

namespace {

NormPtr euclid(int dim) {
  return std::make_shared<QuadraticNorm>(Mat(Mat::Identity(dim, dim)));
}

ImmersedSurface make_surface(NormPtr ambient, ChartPtr chart, double extent) {
  ImmersedSurface s;
  s.ambient = std::move(ambient);
  s.chart = std::move(chart);
  s.domain = {-extent, extent, -extent, extent};
  return s;
}

ImmersedSurface plane_surface() {
  Vec p = Vec::Zero(3), a = Vec::Zero(3), b = Vec::Zero(3);
  a[0] = 1.0;
  b[1] = 1.0;
  return make_surface(euclid(3), std::make_shared<AffineChart>(p, a, b), 10.0);
}

CalibratorField plane_field() {
  CalibratorOptions opt;
  opt.n_t = 15;
  opt.n_s = 10;
  return make_calibrator(plane_surface(), Vec2(0.0, 0.0), Vec2(1.0, 0.0), 1.0, 1e-3, opt);
}

// the saddle-chart instance used throughout: sigma = 0.05, interior length 0.1
CalibratorField saddle_field(int n_t = 21, int n_s = 10) {
  ImmersedSurface s =
      make_surface(euclid(4), std::make_shared<SaddleQuarticChart>(0.05), 0.2);
  CalibratorOptions opt;
  opt.n_t = n_t;
  opt.n_s = n_s;
  return make_calibrator(s, Vec2(-0.04, -0.01), Vec2(1.0, 0.25), 0.1, 1e-3, opt);
}

}  // namespace

TEST_CASE("plane chart: h is the foot-of-perpendicular parameter") {
  CalibratorField field = plane_field();
  const double a = field.a();

  // defining property h(gamma(t)) = t
  Vec2 c, cdot;
  field.path().state_at(a + 0.3, c, cdot);
  CHECK(field.h_eval(c) == doctest::Approx(a + 0.3).epsilon(1e-11));

  // off the line the implicit relation reduces to <gamma_dot, x - gamma(t)> = 0
  Vec2 x = c + 0.02 * Vec2(-cdot[1], cdot[0]);
  CHECK(field.h_eval(x) == doctest::Approx(a + 0.3).epsilon(1e-9));

  // dh is the constant Legendre image of the direction; phi*(dh) = 1
  Covector dh = field.dh_eval(x);
  CHECK((dh - Covector(Vec(cdot))).norm() < 1e-9);

  // orthogonal special coordinates: r(t,s) = gamma(t) + s n, rho identically 1
  RhoReport rho = field.verify_rho();
  CHECK(rho.rho_on_axis_err < 1e-12);
  CHECK(std::abs(rho.rho_s_max) < 1e-10);
  CHECK(std::abs(rho.rho_ss_min) < 1e-8);

  // any small sigma upgrades h to a calibrator on the flat tube
  CalibrationReport cal = field.calibrate_correct();
  CHECK(cal.certified);
  CHECK(cal.phi_star_dg_max <= 1.0 + 1e-9);
}

TEST_CASE("saddle chart: implicit calibrator properties") {
  CalibratorField field = saddle_field();
  const CalibratorGrid& grid = field.grid();

  // h(gamma(t)) = t along the base path
  for (int i = 0; i < grid.n_t; i += 4) {
    Vec2 c, cdot;
    field.path().state_at(grid.t_nodes[i], c, cdot);
    CHECK(std::abs(field.h_eval(c) - grid.t_nodes[i]) < 1e-9);
  }

  // rho(t, 0) = 1: the gradient field has unit induced speed on the axis
  RhoReport rho = field.verify_rho();
  CHECK(rho.rho_on_axis_err < 1e-7);

  // displacement along the level direction fixes h
  const int mid = grid.n_t / 2;
  double t0 = grid.t_nodes[mid];
  Vec2 on_axis = grid.node[grid.at(mid, grid.n_s)];
  Covector dh0 = field.dh_eval(on_axis);
  Vec2 level(-dh0[1], dh0[0]);
  level.normalize();
  CHECK(std::abs(field.h_eval(on_axis + 1e-3 * level) - t0) < 1e-6);

  // phi*(dh) = 1 on the geodesic
  NormPtr phi = induced_metric(field.surface(), on_axis);
  CHECK(std::abs(dual_eval(*phi, dh0) - 1.0) < 1e-7);

  // implicit dh matches central differences of h over tube points
  auto rng = make_rng(61);
  std::uniform_real_distribution<double> ut(field.a(), field.b());
  std::uniform_real_distribution<double> us(-field.s_max(), field.s_max());
  for (int k = 0; k < 100; ++k) {
    Vec2 cc, dd;
    field.path().state_at(ut(rng), cc, dd);
    Vec2 x = cc + us(rng) * Vec2(-dd[1], dd[0]);
    Covector dh = field.dh_eval(x);
    const double h_fd = field.s_max() / 50.0;  // first-derivative step
    Covector fd(2);
    fd[0] = (field.h_eval(x + Vec2(h_fd, 0)) - field.h_eval(x - Vec2(h_fd, 0))) / (2 * h_fd);
    fd[1] = (field.h_eval(x + Vec2(0, h_fd)) - field.h_eval(x - Vec2(0, h_fd))) / (2 * h_fd);
    CHECK((dh - fd).norm() < 1e-6);
  }

  // grid condition (2): h(r(t,s)) = t
  double worst = 0.0;
  for (int i = 0; i < grid.n_t; ++i)
    for (int j = 0; j < grid.cols(); j += 2)
      worst = std::max(worst, std::abs(field.h_eval(grid.node[grid.at(i, j)]) -
                                       grid.t_nodes[i]));
  CHECK(worst < 1e-7);

  // grid condition (3): the stored tangent field is the rescaled gradient
  for (int i = 0; i < grid.n_t; i += 5)
    for (int j = 0; j < grid.cols(); j += 4) {
      Vec2 w = field.flow_direction(grid.node[grid.at(i, j)]);
      CHECK((w - grid.rt_param[grid.at(i, j)]).norm() < 1e-9);
    }

  // out-of-tube points are rejected
  CHECK_THROWS_AS(field.h_eval(Vec2(0.19, 0.19)), DomainError);
}

TEST_CASE("saddle chart: rho derivatives certify the almost-calibrator") {
  CalibratorField field = saddle_field(33, 10);
  RhoReport rho = field.verify_rho();
  CHECK(rho.rho_s_max < 1e-4);
  CHECK(rho.rho_ss_min > -1e-4);

  CalibrationReport cal = field.calibrate_correct();
  CHECK(cal.certified);
  CHECK(cal.sigma_witness > 0.0);
  CHECK(cal.phi_star_dg_max <= 1.0 + 1e-9);
}

TEST_CASE("curvature co-vector identities along the geodesic") {
  CalibratorField field = saddle_field(22, 10);  // 20 interior t-nodes
  const CalibratorGrid& grid = field.grid();
  const double ds = field.s_max() / grid.n_s;
  const int n_s = grid.n_s;

  // K annihilates the tangent plane along gamma
  for (int i = 1; i + 1 < grid.n_t; i += 2) {
    CalibratorField::State st = field.state(grid.t_nodes[i]);
    ChartJet jet = field.surface().jet(st.c);
    CHECK(std::abs(pair(st.K, jet.d1.col(0))) < 1e-5);
    CHECK(std::abs(pair(st.K, jet.d1.col(1))) < 1e-5);
  }

  // <L, v'_s(t0, 0)> = 0 at 20 interior nodes (central differences in s)
  int interior = 0;
  for (int i = 1; i + 1 < grid.n_t; ++i, ++interior) {
    CalibratorField::State st = field.state(grid.t_nodes[i]);
    Vec vs = (field.ambient_rt(i, n_s + 1) - field.ambient_rt(i, n_s - 1)) / (2.0 * ds);
    CHECK(std::abs(pair(st.L, vs)) < 1e-5);
  }
  CHECK(interior == 20);

  // the second-derivative identity, three independent routes:
  //   (1/2) rho''_ss = Q(r''_ts, r''_ts) - Q(r''_tt, n) Q(r''_ss, n)
  //                  = Q(v'_s, v'_s) + L(v''_ss)
  const int mid = grid.n_t / 2;
  CalibratorField::State st = field.state(grid.t_nodes[mid]);
  Mat Q = half_hessian(*field.surface().ambient, st.gamma_dot_S);

  auto rho_at = [&](int j) { return grid.rho[grid.at(mid, j)]; };
  double d1 = (rho_at(n_s + 1) - 2.0 * rho_at(n_s) + rho_at(n_s - 1)) / (ds * ds);
  double d2 = (rho_at(n_s + 2) - 2.0 * rho_at(n_s) + rho_at(n_s - 2)) / (4.0 * ds * ds);
  double lhs = 0.5 * (4.0 * d1 - d2) / 3.0;

  Vec v_p = field.ambient_rt(mid, n_s + 1), v_m = field.ambient_rt(mid, n_s - 1);
  Vec v_0 = field.ambient_rt(mid, n_s);
  Vec vs = (v_p - v_m) / (2.0 * ds);
  Vec vss = (v_p - 2.0 * v_0 + v_m) / (ds * ds);
  Vec r_p = field.ambient_node(mid, n_s + 1), r_m = field.ambient_node(mid, n_s - 1);
  Vec r_0 = field.ambient_node(mid, n_s);
  Vec rss = (r_p - 2.0 * r_0 + r_m) / (ds * ds);

  // gamma_ddot is Q-normal; n is the Q-unit vector along it
  ChartJet jet = field.surface().jet(st.c);
  Vec2 cddot = geodesic_acceleration(field.surface(), st.c, st.cdot);
  Vec gdd = jet.dxx * (st.cdot[0] * st.cdot[0]) + jet.dxy * (2 * st.cdot[0] * st.cdot[1]) +
            jet.dyy * (st.cdot[1] * st.cdot[1]) + jet.d1 * Vec(cddot);
  double gdd_q = std::sqrt(gdd.dot(Q * gdd));
  REQUIRE(gdd_q > 1e-6);
  Vec n = gdd / gdd_q;

  double route2 = vs.dot(Q * vs) - gdd.dot(Q * n) * rss.dot(Q * n);
  double route3 = vs.dot(Q * vs) + pair(st.L, vss);
  double scale = std::max({std::abs(lhs), std::abs(route2), std::abs(route3), 1e-12});
  CHECK(std::abs(lhs - route2) / scale < 1e-3);
  CHECK(std::abs(lhs - route3) / scale < 1e-3);
}

TEST_CASE("calibration inequality: certified tubes admit no short polylines") {
  CalibratorField field = saddle_field();
  CalibrationReport cal = field.calibrate_correct();
  REQUIRE(cal.certified);

  const ImmersedSurface& s = field.surface();
  Vec2 ca, va, cb, vb;
  field.path().state_at(field.a(), ca, va);
  field.path().state_at(field.b(), cb, vb);
  const double expected = field.b() - field.a();

  auto rng = make_rng(67);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> n_nodes_dist(3, 9);
  for (int trial = 0; trial < 200; ++trial) {
    int n = n_nodes_dist(rng);
    std::vector<Vec2> poly;
    poly.push_back(ca);
    for (int i = 1; i + 1 < n; ++i) {
      double t = field.a() + expected * i / (n - 1.0);
      Vec2 c, cdot;
      field.path().state_at(t, c, cdot);
      Vec2 off(gauss(rng), gauss(rng));
      if (off.norm() > 1.0) off.normalize();
      poly.push_back(c + field.s_max() * off);
    }
    poly.push_back(cb);
    CHECK(length(s, poly) >= expected - 1e-6);
  }
}

TEST_CASE("convex charts violate the saddle inequality and are detected") {
  ImmersedSurface bowl =
      make_surface(euclid(3), PolynomialChart::quadratic_graph(1.0, 0.0, 1.0), 3.0);
  CalibratorOptions opt;
  opt.n_t = 21;
  opt.n_s = 10;
  CalibratorField field =
      make_calibrator(bowl, Vec2(-0.5, 0.0), Vec2(1.0, 0.0), 1.0, 1e-3, opt);
  RhoReport rho = field.verify_rho();
  CHECK(rho.rho_ss_min < 0.0);  // the saddle hypothesis fails, loudly
}

TEST_CASE("rho grid CSV") {
  CalibratorField field = plane_field();
  std::string csv = rho_grid_to_csv(field.grid());
  CHECK(csv.find("t,s,rho") == 0);
}
