#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace collapse_lab {

// Replica concurrency cap: COLLAPSE_LAB_THREADS when set, otherwise the
// machine parallelism. requested = 0 asks for the cap itself.
inline int effective_threads(int requested) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
        const int env_cap = std::atoi(env);
        if (env_cap >= 1) cap = env_cap;
    }
    if (requested < 1) return cap;
    return requested < cap ? requested : cap;
}

// Runs fn(index) for index in [0, count) on the given number of threads.
// Work items must be independent; the first exception is rethrown after all
// threads join.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (count == 0) return;
    const int workers = threads < 1 ? 1 : threads;
    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const auto spawn = static_cast<std::size_t>(workers) < count
                           ? static_cast<std::size_t>(workers)
                           : count;
    pool.reserve(spawn);
    for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace collapse_lab
