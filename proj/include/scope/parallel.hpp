#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scope {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
    static std::atomic<unsigned> cap{0};
    return cap;
}
} // namespace detail

/// Caps worker threads for all library loops; 0 means hardware concurrency.
inline void set_max_threads(unsigned n) { detail::thread_cap().store(n); }

inline unsigned max_threads() {
    unsigned n = detail::thread_cap().load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Calls fn(i) for i in [0, n). Work is handed out in contiguous blocks;
/// callers write results into per-index slots so the outcome does not
/// depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t block = std::max<std::size_t>(1, n / (workers * 8));
    auto work = [&] {
        try {
            for (;;) {
                const std::size_t start = next.fetch_add(block);
                if (start >= n) return;
                const std::size_t stop = std::min(n, start + block);
                for (std::size_t i = start; i < stop; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace scope
