#pragma once

#include <cstddef>
#include <functional>

namespace gcflow {

/// Resolves a requested worker count: values <= 0 mean "use the hardware count".
int resolve_thread_count(int requested);

/// Runs body(begin, end) over disjoint contiguous chunks of [0, n).
///
/// Workers only write to their own index range, and callers perform any
/// reductions serially afterwards, so results are bitwise independent of the
/// thread count. The body must not throw; report per-index failures through a
/// status array and inspect it after the join.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace gcflow
