#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace spinglass {

inline int hardware_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// requested <= 0 means "pick for me": SPINGLASS_THREADS if set, else all cores.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPINGLASS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return hardware_threads();
}

// Runs body(i) for i in [0, count). Work items are claimed dynamically, so
// callers must make each item self-contained (own seed, own output slot);
// then the result is independent of the thread count. The first exception
// thrown by any item is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& body) {
    if (count <= 0) return;
    threads = std::min<std::int64_t>(resolve_threads(threads), count);
    if (threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spinglass
