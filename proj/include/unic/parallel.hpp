#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace unic {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs body(begin, end) over contiguous chunks of [0, count). Outputs must
// be partitioned by index so results do not depend on the worker count.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned threads, Body&& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        body(std::size_t(0), count);
        return;
    }
    if (threads > count) threads = static_cast<unsigned>(count);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    std::size_t chunk = count / threads;
    std::size_t rem = count % threads;
    std::size_t begin = 0;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t end = begin + chunk + (t < rem ? 1 : 0);
        pool.emplace_back([&, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace unic
