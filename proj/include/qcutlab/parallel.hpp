#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace qcutlab {

inline unsigned worker_count() {
    if (const char* env = std::getenv("QCUTLAB_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Static-partition parallel loop: f(i) for i in [0, n). Each index is
// evaluated exactly once; exceptions are rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(used);
    pool.reserve(used);
    for (unsigned w = 0; w < used; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += used) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Parallel map with a fixed-order reduction: results land in an indexed
// buffer and are combined in index order, so the sum is bit-reproducible
// regardless of thread count or scheduling.
template <class T, class Map, class Reduce>
T ordered_map_reduce(std::size_t n, T init, Map&& map, Reduce&& reduce) {
    std::vector<T> slots(n, init);
    parallel_for(n, [&](std::size_t i) { slots[i] = map(i); });
    T acc = init;
    for (std::size_t i = 0; i < n; ++i) acc = reduce(acc, slots[i]);
    return acc;
}

} // namespace qcutlab
