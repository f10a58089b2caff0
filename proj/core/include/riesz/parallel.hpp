#pragma once

#include <cstddef>
#include <functional>

namespace riesz {

/// Global worker count used by row-parallel loops (assembly, matvec).
/// Results are partitioned by row, so they are bit-identical for any
/// setting. Default 1.
void set_thread_count(int threads);
int thread_count();

namespace detail {

/// Runs fn(begin, end) on disjoint row ranges covering [0, n).
void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace detail
} // namespace riesz
