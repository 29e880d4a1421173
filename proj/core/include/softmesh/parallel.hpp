#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace softmesh {

// Runs fn(i) for i in [0, n). Work items are claimed dynamically but each item
// index is fixed, so as long as fn(i) writes only to slot i of its outputs the
// result is independent of thread count and scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int num_threads, Fn&& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t t = num_threads > 0 ? static_cast<std::size_t>(num_threads) : hw;
    if (t > n) t = n;
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (std::size_t w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace softmesh
