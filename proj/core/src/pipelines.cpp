// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/pipelines.hpp"

#include "minkgeo/calibrator.hpp"
#include "minkgeo/convexgeom.hpp"
#include "minkgeo/embedding.hpp"
#include "minkgeo/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace minkgeo {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& config, const std::set<std::string>& allowed) {
  for (auto it = config.begin(); it != config.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: \"" + it.key() + "\"");
}

json report_skeleton(const json& config, std::uint64_t seed) {
  json report;
  report["version"] = kVersion;
  report["command"] = config.value("command", "");
  report["seed"] = seed;
  report["config"] = config;
  return report;
}

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-vector");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

ImmersedSurface surface_from_config(const json& config) {
  if (!config.contains("surface")) throw ConfigError("missing \"surface\"");
  return surface_from_json(config["surface"].dump());
}

// ------------------------------- norm-check --------------------------------

PipelineResult run_norm_check(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "norm", "n_samples"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  NormPtr norm = norm_from_json(config.at("norm").dump());
  const int n = config.value("n_samples", 200);

  double min_eig = hessian_eigenvalue_sweep(*norm);
  double legendre_err = 0.0, dual_err = 0.0, homo_err = 0.0;
  auto rng = make_rng(seed);
  for (int k = 0; k < n; ++k) {
    Vec v = random_direction(rng, norm->dim()) *
            std::exp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    Covector L = legendre(*norm, v);
    dual_err = std::max(dual_err, std::abs(dual_eval(*norm, L) - norm->eval(v)));
    legendre_err = std::max(legendre_err, (legendre_inverse(*norm, L) - v).norm());
    for (double t : {0.5, 2.0, 10.0})
      homo_err = std::max(homo_err, (legendre(*norm, Vec(t * v)) - t * L).norm() /
                                        std::max(1.0, t * L.norm()));
  }
  report["results"] = {{"family", norm->family()},
                       {"dim", norm->dim()},
                       {"hessian_min_eigenvalue", min_eig},
                       {"legendre_roundtrip_max_err", legendre_err},
                       {"dual_identity_max_err", dual_err},
                       {"legendre_homogeneity_max_err", homo_err}};
  bool ok = min_eig > 0.0 && legendre_err < 1e-8 && dual_err < 1e-8;
  out.exit_code = ok ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

// --------------------------------- classify --------------------------------

PipelineResult run_classify(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "surface", "grid", "q_direction", "expect"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  ImmersedSurface surface = surface_from_config(config);
  int nx = 9, ny = 9;
  if (config.contains("grid")) {
    nx = config["grid"].at(0).get<int>();
    ny = config["grid"].at(1).get<int>();
  }
  Vec2 q_dir(1.0, 0.0);
  if (config.contains("q_direction")) q_dir = vec2_from(config["q_direction"]);
  RegionClassification region = classify_region(surface, nx, ny, q_dir);
  report["results"] = {{"n_strictly_saddle", region.n_strict},
                       {"n_saddle", region.n_saddle},
                       {"n_not_saddle", region.n_not}};
  out.files.emplace_back("verdicts.csv", region_to_csv(region));
  out.exit_code = 0;
  if (config.contains("expect")) {
    const std::string expect = config["expect"].get<std::string>();
    const int total = static_cast<int>(region.verdicts.size());
    bool match = (expect == "all_strictly_saddle" && region.n_strict == total) ||
                 (expect == "all_saddle" && region.n_not == 0) ||
                 (expect == "all_not_saddle" && region.n_not == total);
    report["results"]["expectation_met"] = match;
    if (!match) out.exit_code = 2;
  }
  out.report_json = report.dump(2);
  return out;
}

// ---------------------------------- shoot ----------------------------------

PipelineResult run_shoot(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "surface", "x0", "v0", "T", "dt"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  ImmersedSurface surface = surface_from_config(config);
  GeodesicPath path = shoot(surface, vec2_from(config.at("x0")), vec2_from(config.at("v0")),
                            config.at("T").get<double>(), config.value("dt", 1e-3));
  report["results"] = {{"length", path.length()},
                       {"truncated", path.truncated},
                       {"max_speed_residual", path.max_speed_residual()},
                       {"max_tangency_residual", path.max_tangency_residual()}};
  out.files.emplace_back("path.csv", path_to_csv(path));
  out.exit_code = 0;
  out.report_json = report.dump(2);
  return out;
}

// --------------------------------- connect ---------------------------------

PipelineResult run_connect(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "surface", "x0", "x1", "dt", "bvp_tol",
                               "max_restarts"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  ImmersedSurface surface = surface_from_config(config);
  ConnectOptions options;
  options.seed = seed;
  options.dt = config.value("dt", 1e-3);
  options.bvp_tol = config.value("bvp_tol", 1e-8);
  options.max_restarts = config.value("max_restarts", 20);
  ConnectResult res =
      connect(surface, vec2_from(config.at("x0")), vec2_from(config.at("x1")), options);
  report["results"] = {{"found", res.found},
                       {"length", res.length},
                       {"n_solutions", res.n_solutions},
                       {"multiple", res.multiple}};
  if (res.found) out.files.emplace_back("path.csv", path_to_csv(res.path));
  out.exit_code = res.found ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

// -------------------------------- calibrate --------------------------------

PipelineResult run_calibrate(const json& config, std::uint64_t seed, double tol_scale) {
  reject_unknown_keys(config, {"command", "seed", "surface", "x0", "v0", "length", "dt",
                               "s_max", "n_t", "n_s", "multistarts", "n_nodes",
                               "expect_certified"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  ImmersedSurface surface = surface_from_config(config);
  const Vec2 x0 = vec2_from(config.at("x0"));
  const Vec2 v0 = vec2_from(config.at("v0"));
  const double interior = config.at("length").get<double>();
  const double dt = config.value("dt", 1e-3);

  CalibratorOptions copt;
  if (config.contains("s_max")) copt.s_max = config["s_max"].get<double>();
  copt.n_t = config.value("n_t", 33);
  copt.n_s = config.value("n_s", 10);
  CalibratorField field = make_calibrator(surface, x0, v0, interior, dt, copt);

  RhoReport rho = field.verify_rho();
  CalibrationReport cal = field.calibrate_correct();

  // competitor search on the interior window
  Vec2 ca, va;
  field.path().state_at(field.a(), ca, va);
  GeodesicPath interior_path = shoot(surface, ca, va, interior, dt);
  CompetitorOptions opt;
  opt.multistarts = config.value("multistarts", 64);
  opt.seed = seed;
  CompetitorResult comp =
      competitor_search(surface, interior_path, field.s_max(), config.value("n_nodes", 33), opt);

  report["results"] = {{"rho_s_max", rho.rho_s_max},
                       {"rho_ss_min", rho.rho_ss_min},
                       {"rho_on_axis_err", rho.rho_on_axis_err},
                       {"sigma_witness", cal.sigma_witness},
                       {"phi_star_dg_max", cal.phi_star_dg_max},
                       {"certified", cal.certified},
                       {"competitor_gap", comp.gain()},
                       {"geodesic_length", comp.geodesic_length},
                       {"competitor_length", comp.best_length}};
  out.files.emplace_back("rho.csv", rho_grid_to_csv(field.grid()));
  out.files.emplace_back("path.csv", path_to_csv(interior_path));

  bool expected = config.value("expect_certified", true);
  bool good = cal.certified && comp.gain() <= 1e-6 * tol_scale;
  out.exit_code = (good == expected) ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

// ---------------------------------- embed ----------------------------------

PipelineResult run_embed(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "metric", "norm"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  std::shared_ptr<const FinslerMetric2D> metric;
  if (config.contains("metric"))
    metric = metric_from_json(config["metric"].dump());
  else if (config.contains("norm"))
    metric = std::make_shared<ConstantMetric>(norm_from_json(config["norm"].dump()));
  else
    throw ConfigError("embed: need \"metric\" or \"norm\"");

  bool certified;
  if (metric->kind() == "constant") {
    EmbeddingArtifact artifact = embed_constant(*metric->norm_at(Vec2::Zero()));
    report["results"] = json::parse(artifact_to_json(artifact));
    out.files.emplace_back("artifact.json", artifact_to_json(artifact));
    certified = artifact.certified;
  } else {
    BlowupResult blow = blowup_reduce(*metric);
    json r = json::parse(artifact_to_json(blow.artifact));
    r["blowup"] = {{"eps", blow.eps},
                   {"deviation", blow.deviation},
                   {"ratios", blow.ratios},
                   {"converged", blow.converged},
                   {"chosen_eps", blow.chosen_eps},
                   {"final_isometry_error", blow.final_isometry_error}};
    report["results"] = r;
    out.files.emplace_back("artifact.json", artifact_to_json(blow.artifact));
    certified = blow.artifact.certified && blow.converged &&
                blow.final_isometry_error < 1e-6;
  }
  out.exit_code = certified ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

// ------------------------------- cone-shortcut -------------------------------

PipelineResult run_cone_shortcut(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "norm3", "n_cones"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  NormPtr norm3 = norm_from_json(config.at("norm3").dump());
  if (norm3->dim() != 3) throw ConfigError("cone-shortcut: norm3 must be 3D");
  const int n_cones = config.value("n_cones", 20);

  auto rng = make_rng(seed);
  double min_margin = std::numeric_limits<double>::infinity();
  double max_limit_err = 0.0;
  json cones = json::array();
  for (int k = 0; k < n_cones; ++k) {
    TrihedralCone cone = random_sharp_trihedral(rng);
    Vec3 p, q;
    random_face_points(cone, rng, p, q);
    ConeShortcutResult res = cone_shortcut(*norm3, cone, p, q);
    min_margin = std::min(min_margin, res.margin);
    // FD slope of (f - g)/t vs the strict-triangle-inequality limit; the
    // identity is a property of the cone geometry, independent of which
    // shortcut branch won
    Vec3 v = cone_outward_vector(cone), v1, v2;
    cone_edge_velocities(cone, p, q, v1, v2);
    auto nn = [&](const Vec3& x) { return norm3->eval(Vec(x)); };
    double rhs = nn(v - v1) + nn(v - v2) - nn(v1 - v2);
    auto fg = [&](double t) {
      double ap = cone.nu3.dot(p), aq = cone.nu3.dot(q), beta = -cone.nu3.dot(v);
      Vec3 a = p + (ap / (ap + t * beta)) * (t * v - p);
      Vec3 b = q + (aq / (aq + t * beta)) * (t * v - q);
      double f = nn(p - t * v) + nn(q - t * v);
      double g = nn(p - a) + nn(a - b) + nn(b - q);
      return (f - g) / t;
    };
    double h = 1e-4 * std::max(p.norm(), q.norm());
    double slope = 2.0 * fg(h) - fg(2.0 * h);  // first-order extrapolation
    double limit_err = std::abs(slope - rhs);
    max_limit_err = std::max(max_limit_err, limit_err);
    cones.push_back({{"margin", res.margin},
                     {"base_length", res.base_length},
                     {"via_two_segment_line", res.via_two_segment_line},
                     {"fprime0", res.fprime0},
                     {"limit_identity_err", limit_err}});
  }
  report["results"] = {{"n_cones", n_cones},
                       {"min_margin", min_margin},
                       {"max_limit_identity_err", max_limit_err},
                       {"cones", cones}};
  out.exit_code = (min_margin > 0.0 && max_limit_err < 1e-4) ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

// -------------------------------- refute-line --------------------------------

PipelineResult run_refute_line(const json& config, std::uint64_t seed) {
  reject_unknown_keys(config, {"command", "seed", "scene", "lambdas", "dt", "expect"});
  PipelineResult out;
  json report = report_skeleton(config, seed);
  ConvexScene scene = scene_from_json(config.at("scene").dump());
  RefuteOptions options;
  options.seed = seed;
  if (config.contains("lambdas"))
    options.lambdas = config["lambdas"].get<std::vector<double>>();
  options.dt = config.value("dt", 1e-3);
  RefuteReport res = geodesic_line_refute(scene, options);
  report["results"] = {{"cone_sharp", res.cone_sharp},
                       {"cone_has_interior", res.cone_has_interior},
                       {"refuted", res.refuted},
                       {"inconclusive", res.inconclusive},
                       {"refuting_lambda", res.refuting_lambda},
                       {"competitor_length", res.competitor_length},
                       {"shortcut_margin", res.shortcut.margin},
                       {"shortcut_found", res.shortcut.found},
                       {"note", res.note}};
  if (!res.competitor.empty())
    out.files.emplace_back("competitor.csv", competitor_to_csv(res.competitor));
  const std::string expect = config.value("expect", "refuted");
  bool match = (expect == "refuted" && res.refuted) ||
               (expect == "inconclusive" && res.inconclusive);
  report["results"]["expectation_met"] = match;
  out.exit_code = match ? 0 : 2;
  out.report_json = report.dump(2);
  return out;
}

}  // namespace

PipelineResult run_pipeline(const std::string& config_json, const PipelineOverrides& overrides) {
  PipelineResult out;
  json config;
  try {
    config = json::parse(config_json);
  } catch (const std::exception& e) {
    json report;
    report["error"] = std::string("config parse error: ") + e.what();
    out.report_json = report.dump(2);
    out.exit_code = 1;
    return out;
  }
  try {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (overrides.has_seed) config["seed"] = overrides.seed;
    const std::uint64_t seed = config.value("seed", 1ULL);
    const std::string command = config.value("command", "");
    if (command == "norm-check") return run_norm_check(config, seed);
    if (command == "classify") return run_classify(config, seed);
    if (command == "shoot") return run_shoot(config, seed);
    if (command == "connect") return run_connect(config, seed);
    if (command == "calibrate") return run_calibrate(config, seed, overrides.tol_scale);
    if (command == "embed") return run_embed(config, seed);
    if (command == "cone-shortcut") return run_cone_shortcut(config, seed);
    if (command == "refute-line") return run_refute_line(config, seed);
    throw ConfigError("unknown command: \"" + command + "\"");
  } catch (const std::exception& e) {
    json report;
    report["version"] = kVersion;
    report["config"] = config;
    report["error"] = e.what();
    out.report_json = report.dump(2);
    out.exit_code = 1;
    return out;
  }
}

}  // namespace minkgeo
