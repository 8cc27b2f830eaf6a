#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace porous {

// Static block split of [0, n) over worker threads. Results must be written
// to per-index slots by the callable; reductions stay deterministic when the
// caller folds the slots in index order afterwards.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace porous
