#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace circuitvec {

/// Runs fn(i) for every i in [0, count) using up to `threads` workers.
/// Each index is processed exactly once; callers must make fn(i) write only
/// to per-index slots so the result is invariant to the worker count.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned workers = threads;
    if (static_cast<std::size_t>(workers) > count) workers = static_cast<unsigned>(count);
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace circuitvec
