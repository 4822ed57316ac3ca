#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parabolic {

namespace detail {
inline std::atomic<unsigned>& thread_cap_storage() {
    static std::atomic<unsigned> cap{0};
    return cap;
}
}  // namespace detail

/// Caps the number of worker threads used anywhere in the library; 0 means
/// hardware concurrency.
inline void set_thread_cap(unsigned n) { detail::thread_cap_storage() = n; }

inline unsigned thread_count() {
    const unsigned cap = detail::thread_cap_storage();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return cap == 0 ? hw : cap;
}

/// Runs body(i) for i in [0, n). Work is handed out in fixed-size chunks, so
/// results only depend on body, never on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        try {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace parabolic
