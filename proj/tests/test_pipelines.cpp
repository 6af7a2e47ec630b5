// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#include "minkgeo/pipelines.hpp"

#include <doctest.h>

#include <string>

using namespace minkgeo;

namespace {

bool has_file(const PipelineResult& r, const std::string& name) {
  for (const auto& [n, c] : r.files)
    if (n == name) return !c.empty();
  return false;
}

const char* kSaddleSurface = R"({
  "ambient": {"family": "quadratic", "dim": 4,
              "params": {"A": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}},
  "chart": {"type": "saddle_quartic", "sigma": 0.05},
  "domain": [-0.2, 0.2, -0.2, 0.2]
})";

}  // namespace

TEST_CASE("malformed configs fail with diagnostics, not crashes") {
  CHECK(run_pipeline("{ not json").exit_code == 1);
  CHECK(run_pipeline("{\"command\": \"no-such-thing\"}").exit_code == 1);

  PipelineResult unknown = run_pipeline(
      R"({"command": "shoot", "surface": {}, "x0": [0,0], "v0": [1,0], "T": 1, "typo_key": 3})");
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.report_json.find("typo_key") != std::string::npos);
}

TEST_CASE("norm-check passes healthy norms and reports sweeps") {
  std::string config = R"({
    "command": "norm-check", "seed": 5,
    "norm": {"family": "quartic_perturbed", "dim": 2,
             "params": {"A": [[1,0],[0,1]], "lambda": 0.1,
                        "quartic": [{"coeff":1,"exps":[4,0]},{"coeff":1,"exps":[0,4]}]}}
  })";
  PipelineResult r = run_pipeline(config);
  CHECK(r.exit_code == 0);
  CHECK(r.report_json.find("hessian_min_eigenvalue") != std::string::npos);

  // lambda far past the convexity bound: construction fails, exit 1, and the
  // diagnostic carries the eigenvalue report
  std::string bad = R"({
    "command": "norm-check", "seed": 5,
    "norm": {"family": "quartic_perturbed", "dim": 2,
             "params": {"A": [[1,0],[0,1]], "lambda": 50.0,
                        "quartic": [{"coeff":1,"exps":[4,0]},{"coeff":1,"exps":[0,4]}]}}
  })";
  PipelineResult rb = run_pipeline(bad);
  CHECK(rb.exit_code == 1);
  CHECK(rb.report_json.find("eigenvalue") != std::string::npos);
}

TEST_CASE("classify emits verdicts and honors expectations") {
  std::string config = std::string(R"({"command": "classify", "seed": 1, "grid": [7, 7],
    "expect": "all_strictly_saddle", "surface": )") + kSaddleSurface + "}";
  PipelineResult r = run_pipeline(config);
  CHECK(r.exit_code == 0);
  CHECK(has_file(r, "verdicts.csv"));

  // a convex graph contradicts the saddle expectation: exit 2
  std::string bowl = R"({"command": "classify", "seed": 1, "grid": [5, 5],
    "expect": "all_strictly_saddle",
    "surface": {"ambient": {"family": "quadratic", "dim": 3,
                            "params": {"A": [[1,0,0],[0,1,0],[0,0,1]]}},
                "chart": {"type": "polynomial",
                          "components": [[[1,1,0]], [[1,0,1]], [[1,2,0],[1,0,2]]]},
                "domain": [-1, 1, -1, 1]}})";
  PipelineResult rb = run_pipeline(bowl);
  CHECK(rb.exit_code == 2);
}

TEST_CASE("shoot and calibrate produce the declared reports") {
  std::string shoot_cfg = std::string(R"({"command": "shoot", "seed": 1,
    "x0": [-0.04, 0.0], "v0": [1.0, 0.2], "T": 0.1, "dt": 1e-3, "surface": )") +
                          kSaddleSurface + "}";
  PipelineResult rs = run_pipeline(shoot_cfg);
  CHECK(rs.exit_code == 0);
  CHECK(has_file(rs, "path.csv"));
  CHECK(rs.report_json.find("max_speed_residual") != std::string::npos);

  std::string cal_cfg = std::string(R"({"command": "calibrate", "seed": 2,
    "x0": [-0.04, -0.01], "v0": [1.0, 0.25], "length": 0.1, "dt": 1e-3,
    "n_t": 21, "n_s": 10, "multistarts": 16, "n_nodes": 17, "surface": )") +
                        kSaddleSurface + "}";
  PipelineResult rc = run_pipeline(cal_cfg);
  CHECK(rc.exit_code == 0);
  CHECK(has_file(rc, "rho.csv"));
  for (const char* key : {"rho_s_max", "rho_ss_min", "sigma_witness", "phi_star_dg_max",
                          "competitor_gap"})
    CHECK(rc.report_json.find(key) != std::string::npos);
}

TEST_CASE("cone-shortcut and refute-line pipelines") {
  std::string cone_cfg = R"({"command": "cone-shortcut", "seed": 9, "n_cones": 6,
    "norm3": {"family": "quartic_perturbed", "dim": 3,
              "params": {"A": [[1,0,0],[0,1,0],[0,0,1]], "lambda": 0.08,
                         "quartic": [{"coeff":1,"exps":[4,0,0]},
                                     {"coeff":1,"exps":[0,4,0]},
                                     {"coeff":1,"exps":[0,0,4]}]}}})";
  PipelineResult rc = run_pipeline(cone_cfg);
  CHECK(rc.exit_code == 0);
  CHECK(rc.report_json.find("min_margin") != std::string::npos);

  std::string cyl_cfg = R"({"command": "refute-line", "seed": 3, "lambdas": [2, 4],
    "expect": "inconclusive",
    "scene": {"norm3": {"family": "quadratic", "dim": 3,
                        "params": {"A": [[1,0,0],[0,1,0],[0,0,1]]}},
              "body": {"kind": "cylinder"}}})";
  PipelineResult rr = run_pipeline(cyl_cfg);
  CHECK(rr.exit_code == 0);
  CHECK(rr.report_json.find("asymptotic cone contains a line") != std::string::npos);
}

TEST_CASE("embed pipeline certifies the Euclidean plane") {
  std::string cfg = R"({"command": "embed", "seed": 4,
    "norm": {"family": "quadratic", "dim": 2, "params": {"A": [[1,0],[0,1]]}}})";
  PipelineResult r = run_pipeline(cfg);
  CHECK(r.exit_code == 0);
  CHECK(has_file(r, "artifact.json"));
  CHECK(r.report_json.find("\"certified\": true") != std::string::npos);
}

TEST_CASE("identical seed and config give byte-identical reports") {
  std::string cfg = std::string(R"({"command": "calibrate", "seed": 11,
    "x0": [-0.04, -0.01], "v0": [1.0, 0.25], "length": 0.1, "dt": 1e-3,
    "n_t": 15, "n_s": 8, "multistarts": 8, "n_nodes": 9, "surface": )") +
                    kSaddleSurface + "}";
  PipelineResult a = run_pipeline(cfg);
  PipelineResult b = run_pipeline(cfg);
  CHECK(a.report_json == b.report_json);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i] == b.files[i]);

  PipelineOverrides other;
  other.has_seed = true;
  other.seed = 12;
  PipelineResult c = run_pipeline(cfg, other);
  CHECK(c.report_json != a.report_json);  // the seed override is recorded
}
