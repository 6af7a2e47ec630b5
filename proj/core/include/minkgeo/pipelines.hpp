// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace minkgeo {

// ---------------------------------------------------------------------------
// Experiment pipelines behind the CLI. A pipeline consumes one JSON config
// document ({"command": ..., "seed": ..., ...}) and produces a JSON report
// plus CSV side files. Exit codes: 0 success / expected outcome, 1
// operational error (bad config, solver failure), 2 a finding that
// contradicts the configured expectation (a bug signal, not a crash).
// ---------------------------------------------------------------------------

struct PipelineResult {
  int exit_code = 1;
  std::string report_json;
  // (filename, content) side outputs, e.g. ("path.csv", ...)
  std::vector<std::pair<std::string, std::string>> files;
};

struct PipelineOverrides {
  bool has_seed = false;
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
};

/// Dispatches on config["command"]; never throws (operational failures come
/// back as exit code 1 with a diagnostic report).
PipelineResult run_pipeline(const std::string& config_json,
                            const PipelineOverrides& overrides = {});

}  // namespace minkgeo
