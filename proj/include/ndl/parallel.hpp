// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace ndl {

/// Worker count: NDL_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
/// Indices are claimed dynamically; callers write results by index, so output
/// order never depends on scheduling. Nested calls run inline. The first
/// exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace ndl
