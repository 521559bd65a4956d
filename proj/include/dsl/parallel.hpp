#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dsl {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Tasks write
/// their results into caller-owned slots keyed by i, so the outcome does not
/// depend on the worker count. The exception of the lowest failing index is
/// rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t) threads.emplace_back(worker);
    worker();
    threads.clear();

    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Worker count from the DSL_WORKERS environment variable, or 1.
std::size_t workers_from_environment();

}  // namespace dsl
