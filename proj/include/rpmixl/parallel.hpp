#pragma once

#include <cstddef>
#include <functional>

namespace rpmixl {

/// Worker cap from RPMIXL_THREADS, else hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to `workers` threads. Each index is visited
/// exactly once; callers write into per-index slots and reduce in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers = worker_count());

}  // namespace rpmixl
