// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
//
// minkgeo: experiments on surfaces in normed spaces. Every run consumes one
// JSON config ({"command": ..., ...}) and writes report.json plus CSV side
// files into --out. Exit codes: 0 expected outcome, 1 operational error,
// 2 a finding contradicting the configured expectation.

#include "minkgeo/io.hpp"
#include "minkgeo/parallel.hpp"
#include "minkgeo/pipelines.hpp"
#include "minkgeo/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{std::string("minkgeo ") + minkgeo::kVersion +
               " - geodesics, saddle embeddings and convex surfaces in "
               "normed spaces"};

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  double tol_scale = 1.0;

  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--jobs", jobs, "worker threads (default: logical cores)");
  app.add_option("--tol-scale", tol_scale, "scales pass/fail tolerances");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  minkgeo::set_worker_count(jobs);

  minkgeo::PipelineOverrides overrides;
  overrides.has_seed = seed_set;
  overrides.seed = seed;
  overrides.tol_scale = tol_scale;

  std::string config;
  try {
    config = minkgeo::read_text_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  minkgeo::PipelineResult result = minkgeo::run_pipeline(config, overrides);

  try {
    std::filesystem::create_directories(out_dir);
    minkgeo::write_text_file(out_dir + "/report.json", result.report_json + "\n");
    for (const auto& [name, content] : result.files)
      minkgeo::write_text_file(out_dir + "/" + name, content);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << result.report_json << "\n";
  return result.exit_code;
}
