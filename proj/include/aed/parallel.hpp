#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace aed {

inline int default_jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n). Work items are pulled from a shared counter, so
// results must be written to slots indexed by i; with that discipline the
// outcome is independent of scheduling and of the worker count.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (jobs <= 0) jobs = default_jobs();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace aed
