// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/surfaces.hpp"

#include "minkgeo/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace minkgeo {

using nlohmann::json;

// -------------------------------- charts ----------------------------------

AffineChart::AffineChart(Vec p, Vec a, Vec b)
    : p_(std::move(p)), a_(std::move(a)), b_(std::move(b)) {
  if (p_.size() != a_.size() || p_.size() != b_.size())
    throw ConfigError("affine chart: inconsistent vector sizes");
  if (p_.size() < 3 || p_.size() > 4)
    throw ConfigError("affine chart: ambient dimension must be 3 or 4");
}

ChartJet AffineChart::jet(const Vec2& x) const {
  ChartJet out;
  out.value = p_ + x[0] * a_ + x[1] * b_;
  out.d1.resize(p_.size(), 2);
  out.d1.col(0) = a_;
  out.d1.col(1) = b_;
  out.dxx = Vec::Zero(p_.size());
  out.dxy = Vec::Zero(p_.size());
  out.dyy = Vec::Zero(p_.size());
  return out;
}

PolynomialChart::PolynomialChart(std::vector<std::vector<ChartMonomial>> components)
    : components_(std::move(components)) {
  if (components_.size() < 3 || components_.size() > 4)
    throw ConfigError("polynomial chart: ambient dimension must be 3 or 4");
  for (const auto& comp : components_)
    for (const auto& t : comp)
      if (t.px < 0 || t.py < 0 || t.px + t.py > 8)
        throw ConfigError("polynomial chart: exponents must be in [0, 8]");
}

std::shared_ptr<PolynomialChart> PolynomialChart::quadratic_graph(double c20, double c11,
                                                                  double c02) {
  std::vector<std::vector<ChartMonomial>> comps(3);
  comps[0] = {{1.0, 1, 0}};
  comps[1] = {{1.0, 0, 1}};
  comps[2] = {{c20, 2, 0}, {c11, 1, 1}, {c02, 0, 2}};
  return std::make_shared<PolynomialChart>(std::move(comps));
}

ChartJet PolynomialChart::jet(const Vec2& x) const {
  const int n = ambient_dim();
  ChartJet out;
  out.value = Vec::Zero(n);
  out.d1 = Mat::Zero(n, 2);
  out.dxx = Vec::Zero(n);
  out.dxy = Vec::Zero(n);
  out.dyy = Vec::Zero(n);
  double px[10], py[10];
  px[0] = py[0] = 1.0;
  for (int k = 1; k < 10; ++k) {
    px[k] = px[k - 1] * x[0];
    py[k] = py[k - 1] * x[1];
  }
  for (int c = 0; c < n; ++c) {
    for (const auto& t : components_[c]) {
      out.value[c] += t.coeff * px[t.px] * py[t.py];
      if (t.px >= 1) out.d1(c, 0) += t.coeff * t.px * px[t.px - 1] * py[t.py];
      if (t.py >= 1) out.d1(c, 1) += t.coeff * t.py * px[t.px] * py[t.py - 1];
      if (t.px >= 2) out.dxx[c] += t.coeff * t.px * (t.px - 1) * px[t.px - 2] * py[t.py];
      if (t.px >= 1 && t.py >= 1)
        out.dxy[c] += t.coeff * t.px * t.py * px[t.px - 1] * py[t.py - 1];
      if (t.py >= 2) out.dyy[c] += t.coeff * t.py * (t.py - 1) * px[t.px] * py[t.py - 2];
    }
  }
  return out;
}

SphereChart::SphereChart(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw ConfigError("sphere chart: radius must be positive");
}

ChartJet SphereChart::jet(const Vec2& x) const {
  const double cx = std::cos(x[0]), sx = std::sin(x[0]);
  const double cy = std::cos(x[1]), sy = std::sin(x[1]);
  const double R = radius_;
  ChartJet out;
  out.value = Vec(3);
  out.value << R * cx * cy, R * sx * cy, R * sy;
  out.d1.resize(3, 2);
  out.d1.col(0) << -R * sx * cy, R * cx * cy, 0.0;
  out.d1.col(1) << -R * cx * sy, -R * sx * sy, R * cy;
  out.dxx = Vec(3);
  out.dxx << -R * cx * cy, -R * sx * cy, 0.0;
  out.dxy = Vec(3);
  out.dxy << R * sx * sy, -R * cx * sy, 0.0;
  out.dyy = Vec(3);
  out.dyy << -R * cx * cy, -R * sx * cy, -R * sy;
  return out;
}

ChartJet CylinderChart::jet(const Vec2& x) const {
  const double cx = std::cos(x[0]), sx = std::sin(x[0]);
  ChartJet out;
  out.value = Vec(3);
  out.value << cx, sx, x[1];
  out.d1.resize(3, 2);
  out.d1.col(0) << -sx, cx, 0.0;
  out.d1.col(1) << 0.0, 0.0, 1.0;
  out.dxx = Vec(3);
  out.dxx << -cx, -sx, 0.0;
  out.dxy = Vec::Zero(3);
  out.dyy = Vec::Zero(3);
  return out;
}

CappedConeChart::CappedConeChart(double cap_scale) : s_(cap_scale) {
  if (!(cap_scale > 0.0)) throw ConfigError("capped cone chart: cap scale must be positive");
}

ChartJet CappedConeChart::jet(const Vec2& x) const {
  const double w2 = s_ * s_ + x[0] * x[0] + x[1] * x[1];
  const double w = std::sqrt(w2);
  const double w3 = w2 * w;
  ChartJet out;
  out.value = Vec(3);
  out.value << x[0], x[1], w;
  out.d1.resize(3, 2);
  out.d1.col(0) << 1.0, 0.0, x[0] / w;
  out.d1.col(1) << 0.0, 1.0, x[1] / w;
  out.dxx = Vec(3);
  out.dxx << 0.0, 0.0, (s_ * s_ + x[1] * x[1]) / w3;
  out.dxy = Vec(3);
  out.dxy << 0.0, 0.0, -x[0] * x[1] / w3;
  out.dyy = Vec(3);
  out.dyy << 0.0, 0.0, (s_ * s_ + x[0] * x[0]) / w3;
  return out;
}

SaddleQuarticChart::SaddleQuarticChart(double sigma) : sigma_(sigma) {
  if (sigma < 0.0) throw ConfigError("saddle chart: sigma must be >= 0");
}

Vec2 SaddleQuarticChart::planar(double x, double y) const {
  const double s = sigma_;
  const double g = 1.0 - s * s * (x * x + y * y);
  return Vec2(g * (x - s * x * x * x), g * (y - s * y * y * y));
}

Mat2 SaddleQuarticChart::planar_defect(double x, double y) const {
  const double s = sigma_;
  const double x2 = x * x, y2 = y * y;
  Mat2 A;
  A(0, 0) = 3 * s * x2 + s * s * x2 * (3 - 5 * s * x2) + s * s * y2 * (1 - 3 * s * x2);
  A(0, 1) = 2 * s * s * x * y * (1 - s * x2);
  A(1, 0) = 2 * s * s * x * y * (1 - s * y2);
  A(1, 1) = 3 * s * y2 + s * s * y2 * (3 - 5 * s * y2) + s * s * x2 * (1 - 3 * s * y2);
  return A;
}

Mat2 SaddleQuarticChart::planar_defect_quadratic(double x, double y) const {
  const double s = sigma_;
  Mat2 A;
  A(0, 0) = (3 * s + 3 * s * s) * x * x + s * s * y * y;
  A(0, 1) = 2 * s * s * x * y;
  A(1, 0) = 2 * s * s * x * y;
  A(1, 1) = (3 * s + 3 * s * s) * y * y + s * s * x * x;
  return A;
}

ChartJet SaddleQuarticChart::jet(const Vec2& p) const {
  const double s = sigma_;
  const double x = p[0], y = p[1];
  const double g = 1.0 - s * s * (x * x + y * y);
  const double gx = -2 * s * s * x, gy = -2 * s * s * y;
  const double h1 = x - s * x * x * x, h1p = 1 - 3 * s * x * x;
  const double h2 = y - s * y * y * y, h2p = 1 - 3 * s * y * y;
  ChartJet out;
  out.value = Vec(4);
  out.value << g * h1, g * h2, x * x - y * y, x * y;
  out.d1.resize(4, 2);
  out.d1.col(0) << gx * h1 + g * h1p, gx * h2, 2 * x, y;
  out.d1.col(1) << gy * h1, gy * h2 + g * h2p, -2 * y, x;
  out.dxx = Vec(4);
  out.dxx << -2 * s * s * h1 + 2 * gx * h1p + g * (-6 * s * x), -2 * s * s * h2, 2.0, 0.0;
  out.dxy = Vec(4);
  out.dxy << gy * h1p, gx * h2p, 0.0, 1.0;
  out.dyy = Vec(4);
  out.dyy << -2 * s * s * h1, -2 * s * s * h2 + 2 * gy * h2p + g * (-6 * s * y), -2.0, 0.0;
  return out;
}

FiniteDifferenceChart::FiniteDifferenceChart(ChartPtr inner, double step)
    : inner_(std::move(inner)), h_(step) {
  if (!inner_) throw ConfigError("finite difference chart: null inner chart");
  if (!(h_ > 0.0)) throw ConfigError("finite difference chart: step must be positive");
}

ChartJet FiniteDifferenceChart::jet(const Vec2& x) const {
  const double h = h_;
  auto at = [&](double dx, double dy) { return inner_->eval(Vec2(x[0] + dx, x[1] + dy)); };
  ChartJet out;
  out.value = inner_->eval(x);
  out.d1.resize(out.value.size(), 2);
  out.d1.col(0) = (at(h, 0) - at(-h, 0)) / (2 * h);
  out.d1.col(1) = (at(0, h) - at(0, -h)) / (2 * h);
  out.dxx = (at(h, 0) - 2 * out.value + at(-h, 0)) / (h * h);
  out.dyy = (at(0, h) - 2 * out.value + at(0, -h)) / (h * h);
  out.dxy = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
  return out;
}

// ------------------------------- operations --------------------------------

namespace {

double smallest_singular_value(const Mat& d1) {
  Eigen::JacobiSVD<Mat> svd(d1);
  return svd.singularValues().minCoeff();
}

}  // namespace

NormPtr induced_metric(const ImmersedSurface& surface, const Vec2& x) {
  ChartJet jet = surface.jet(x);
  if (smallest_singular_value(jet.d1) <= surface.immersion_tol)
    throw DomainError("induced_metric: chart is not an immersion at this point");
  return std::make_shared<PullbackNorm>(surface.ambient, jet.d1);
}

std::vector<Mat2> second_fundamental_pencil(const ImmersedSurface& surface, const Vec2& x,
                                            const Vec2& q_direction) {
  if (q_direction.squaredNorm() == 0.0)
    throw DomainError("second_fundamental_pencil: zero q_direction");
  ChartJet jet = surface.jet(x);
  const int n = surface.ambient->dim();
  if (smallest_singular_value(jet.d1) <= surface.immersion_tol)
    throw DomainError("second_fundamental_pencil: immersion failure");

  Vec w = jet.d1 * Vec(q_direction);
  Mat Q = half_hessian(*surface.ambient, w);

  // Q-orthonormalize [tangents, ambient basis]; leftovers span the normals
  std::vector<Vec> frame;
  auto push = [&](Vec v) -> bool {
    for (const Vec& f : frame) v -= f.dot(Q * v) * f;
    double norm_q = std::sqrt(std::max(0.0, v.dot(Q * v)));
    if (norm_q < 1e-10) return false;
    frame.push_back(v / norm_q);
    return true;
  };
  push(jet.d1.col(0));
  push(jet.d1.col(1));
  if (frame.size() != 2)
    throw DomainError("second_fundamental_pencil: degenerate tangent plane");
  std::vector<Vec> normals;
  for (int k = 0; k < n && static_cast<int>(normals.size()) < n - 2; ++k) {
    Vec e = Vec::Zero(n);
    e[k] = 1.0;
    if (push(e)) normals.push_back(frame.back());
  }
  if (static_cast<int>(normals.size()) != n - 2)
    throw DomainError("second_fundamental_pencil: degenerate normal space");

  std::vector<Mat2> pencil;
  for (const Vec& nk : normals) {
    Vec Qn = Q * nk;
    Mat2 II;
    II(0, 0) = jet.dxx.dot(Qn);
    II(0, 1) = jet.dxy.dot(Qn);
    II(1, 0) = II(0, 1);
    II(1, 1) = jet.dyy.dot(Qn);
    pencil.push_back(II);
  }
  return pencil;
}

std::string to_string(SaddleClass c) {
  switch (c) {
    case SaddleClass::strictly_saddle: return "strictly_saddle";
    case SaddleClass::saddle: return "saddle";
    default: return "not_saddle";
  }
}

SaddleClass classify_pencil(const std::vector<Mat2>& pencil) {
  if (pencil.size() == 1) {
    double d = pencil[0].determinant();
    if (d < 0.0) return SaddleClass::strictly_saddle;
    if (d == 0.0) return SaddleClass::saddle;
    return SaddleClass::not_saddle;
  }
  const Mat2& A = pencil[0];
  const Mat2& B = pencil[1];
  const double dA = A.determinant();
  const double dB = B.determinant();
  const double m = A(0, 0) * B(1, 1) + A(1, 1) * B(0, 0) - 2.0 * A(0, 1) * B(0, 1);
  // det(aA + bB) = a^2 dA + ab m + b^2 dB must be negative (semi)definite
  if (dA < 0.0 && dA * dB - 0.25 * m * m > 0.0) return SaddleClass::strictly_saddle;
  if (dA <= 0.0 && dB <= 0.0 && dA * dB - 0.25 * m * m >= 0.0) return SaddleClass::saddle;
  return SaddleClass::not_saddle;
}

SaddleVerdict saddle_classify(const ImmersedSurface& surface, const Vec2& x,
                              const Vec2& q_direction) {
  std::vector<Mat2> pencil = second_fundamental_pencil(surface, x, q_direction);
  SaddleVerdict v;
  v.point = x;
  v.detA = pencil[0].determinant();
  if (pencil.size() == 2) {
    v.detB = pencil[1].determinant();
    v.mixed = pencil[0](0, 0) * pencil[1](1, 1) + pencil[0](1, 1) * pencil[1](0, 0) -
              2.0 * pencil[0](0, 1) * pencil[1](0, 1);
  }
  v.cls = classify_pencil(pencil);
  return v;
}

SaddleClass saddle_classify_sweep(const std::vector<Mat2>& pencil, int n_samples, double tol) {
  double max_det = -std::numeric_limits<double>::infinity();
  if (pencil.size() == 1) {
    max_det = pencil[0].determinant();
  } else {
    for (int k = 0; k < n_samples; ++k) {
      double theta = 2.0 * std::numbers::pi * k / n_samples;
      Mat2 form = std::cos(theta) * pencil[0] + std::sin(theta) * pencil[1];
      max_det = std::max(max_det, form.determinant());
    }
  }
  if (max_det < -tol) return SaddleClass::strictly_saddle;
  if (max_det <= tol) return SaddleClass::saddle;
  return SaddleClass::not_saddle;
}

RegionClassification classify_region(const ImmersedSurface& surface, int nx, int ny,
                                     const Vec2& q_direction) {
  if (nx < 2 || ny < 2) throw ConfigError("classify_region: need at least a 2x2 grid");
  RegionClassification out;
  out.verdicts.resize(static_cast<std::size_t>(nx) * ny);
  const DomainRect& d = surface.domain;
  parallel_for(out.verdicts.size(), [&](std::size_t idx) {
    int i = static_cast<int>(idx) % nx;
    int j = static_cast<int>(idx) / nx;
    Vec2 x(d.xmin + (d.xmax - d.xmin) * i / (nx - 1.0),
           d.ymin + (d.ymax - d.ymin) * j / (ny - 1.0));
    out.verdicts[idx] = saddle_classify(surface, x, q_direction);
  });
  for (const auto& v : out.verdicts) {
    if (v.cls == SaddleClass::strictly_saddle)
      ++out.n_strict;
    else if (v.cls == SaddleClass::saddle)
      ++out.n_saddle;
    else
      ++out.n_not;
  }
  return out;
}

// ------------------------------ serialization ------------------------------

namespace {

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json chart_to_json_obj(const Chart& chart) {
  json out;
  out["type"] = chart.type();
  if (const auto* a = dynamic_cast<const AffineChart*>(&chart)) {
    out["p"] = vec_to_json(a->origin());
    out["a"] = vec_to_json(a->axis_a());
    out["b"] = vec_to_json(a->axis_b());
  } else if (const auto* p = dynamic_cast<const PolynomialChart*>(&chart)) {
    json comps = json::array();
    for (const auto& comp : p->components()) {
      json terms = json::array();
      for (const auto& t : comp) terms.push_back(json::array({t.coeff, t.px, t.py}));
      comps.push_back(terms);
    }
    out["components"] = comps;
  } else if (const auto* s = dynamic_cast<const SphereChart*>(&chart)) {
    out["radius"] = s->radius();
  } else if (dynamic_cast<const CylinderChart*>(&chart)) {
    // no params
  } else if (const auto* c = dynamic_cast<const CappedConeChart*>(&chart)) {
    out["cap_scale"] = c->cap_scale();
  } else if (const auto* f = dynamic_cast<const SaddleQuarticChart*>(&chart)) {
    out["sigma"] = f->sigma();
  } else {
    throw ConfigError("chart type is not serializable: " + chart.type());
  }
  return out;
}

ChartPtr chart_from_json_obj(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "affine")
    return std::make_shared<AffineChart>(vec_from_json(j.at("p")), vec_from_json(j.at("a")),
                                         vec_from_json(j.at("b")));
  if (type == "polynomial") {
    std::vector<std::vector<ChartMonomial>> comps;
    for (const auto& comp : j.at("components")) {
      std::vector<ChartMonomial> terms;
      for (const auto& t : comp)
        terms.push_back({t.at(0).get<double>(), t.at(1).get<int>(), t.at(2).get<int>()});
      comps.push_back(std::move(terms));
    }
    return std::make_shared<PolynomialChart>(std::move(comps));
  }
  if (type == "sphere") return std::make_shared<SphereChart>(j.at("radius").get<double>());
  if (type == "cylinder") return std::make_shared<CylinderChart>();
  if (type == "capped_cone")
    return std::make_shared<CappedConeChart>(j.at("cap_scale").get<double>());
  if (type == "saddle_quartic")
    return std::make_shared<SaddleQuarticChart>(j.at("sigma").get<double>());
  throw ConfigError("unknown chart type: " + type);
}

}  // namespace

std::string chart_to_json(const Chart& chart) { return chart_to_json_obj(chart).dump(); }

ChartPtr chart_from_json(const std::string& text) {
  try {
    return chart_from_json_obj(json::parse(text));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("chart JSON parse error: ") + e.what());
  }
}

std::string surface_to_json(const ImmersedSurface& surface) {
  json out;
  out["ambient"] = json::parse(norm_to_json(*surface.ambient));
  out["chart"] = json::parse(chart_to_json(*surface.chart));
  out["domain"] = {surface.domain.xmin, surface.domain.xmax, surface.domain.ymin,
                   surface.domain.ymax};
  out["immersion_tol"] = surface.immersion_tol;
  return out.dump();
}

ImmersedSurface surface_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("surface JSON parse error: ") + e.what());
  }
  ImmersedSurface s;
  s.ambient = norm_from_json(j.at("ambient").dump());
  s.chart = chart_from_json(j.at("chart").dump());
  const auto& d = j.at("domain");
  s.domain = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>(),
              d.at(3).get<double>()};
  if (j.contains("immersion_tol")) s.immersion_tol = j["immersion_tol"].get<double>();
  if (s.chart->ambient_dim() != s.ambient->dim())
    throw ConfigError("surface: chart and ambient norm dimensions disagree");
  return s;
}

std::string region_to_csv(const RegionClassification& region) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,class,detA,detB,m\n";
  for (const auto& v : region.verdicts)
    out << v.point[0] << ',' << v.point[1] << ',' << to_string(v.cls) << ',' << v.detA << ','
        << v.detB << ',' << v.mixed << '\n';
  return out.str();
}

}  // namespace minkgeo
