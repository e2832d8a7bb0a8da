#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace xaffine {

/// Worker cap from XAFFINE_THREADS (0 or unset = hardware concurrency).
inline int thread_count() {
    if (const char* env = std::getenv("XAFFINE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n). Work items must write only to their own output
/// slots so results are identical regardless of the worker count.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace xaffine
