#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hjh {

/** Thread count: explicit argument, then HJH_THREADS, then the hardware. */
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HJH_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/**
 * Runs fn(i) for i in [0, n) on a small work-stealing pool (shared atomic
 * queue). Results must be written to preallocated per-index slots; output
 * order is then deterministic regardless of the thread count.
 */
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace hjh
