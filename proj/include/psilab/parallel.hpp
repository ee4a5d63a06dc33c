#pragma once

#include <cstddef>
#include <functional>

namespace psilab {

/// Global worker count used by parallel loops (default: hardware concurrency).
void set_workers(int n);
int workers();

/// Runs body(i) for i in [0, n) on the worker pool. Iterations must be
/// independent; results must not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace psilab
