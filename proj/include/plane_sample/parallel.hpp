#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ps {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work is assigned
// statically (thread t takes i = t, t+W, ...), so which thread runs which index
// never depends on timing; fn must write its result into a pre-allocated slot
// for index i. With workers <= 1 the loop runs inline.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = workers < n ? workers : n;
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += w) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ps
