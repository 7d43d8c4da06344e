#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gouysim {

/// Thread count from an explicit request, else GOUYSIM_THREADS, else hardware.
int resolve_threads(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers in contiguous
/// chunks. Each index is written by exactly one worker, so output order never
/// depends on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t begin = w * chunk;
                const std::size_t end = std::min(n, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace gouysim
