// Copyright (c) 2026 the minkgeo authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace minkgeo {

/// Number of worker threads used by parallel_for. 0 means hardware
/// concurrency. The CLI sets this once from --jobs before running pipelines.
void set_worker_count(int jobs);
int worker_count();

/// Runs fn(i) for i in [0, n). Results must be written to preallocated,
/// index-owned slots; reductions happen after the join, so the outcome does
/// not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace minkgeo
