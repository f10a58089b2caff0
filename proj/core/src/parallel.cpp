#include "riesz/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace riesz {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
    g_threads.store(std::max(1, threads));
}

int thread_count() {
    return g_threads.load();
}

namespace detail {

void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const int nt = std::min<std::size_t>(thread_count(), n ? n : 1);
    if (nt <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(fn, b, e);
    }
    for (auto& th : pool) th.join();
}

} // namespace detail
} // namespace riesz
