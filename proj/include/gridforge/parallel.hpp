#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace gridforge {

/// Worker count: GRIDFORGE_THREADS if set and positive, else the hardware concurrency.
inline unsigned thread_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRIDFORGE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

/// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so
/// results do not depend on the thread count. The exception from the lowest
/// failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace gridforge
