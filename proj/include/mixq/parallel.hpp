// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mixq {

inline unsigned hardware_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

/// Runs f(0..n-1) on up to `jobs` threads. Work items must be independent;
/// results written by index are then schedule-independent. If several items
/// throw, the exception of the lowest index is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    const std::size_t workers = std::min<std::size_t>(jobs ? jobs : hardware_jobs(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace mixq
