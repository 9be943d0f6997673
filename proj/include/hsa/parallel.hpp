/**
 * Minimal deterministic parallel loop. Iterations write to caller-owned
 * slots, so results are bit-identical for any thread count; the HS_THREADS
 * environment variable caps the number of worker threads.
 */

#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace hsa::detail {

/// Worker-thread count: HS_THREADS if set (minimum 1), else hardware
/// concurrency.
int thread_budget();

template <typename Body>
void parallel_for(Eigen::Index n, Body&& body) {
    const Eigen::Index budget = std::min<Eigen::Index>(thread_budget(), n);
    if (budget <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<Eigen::Index> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const Eigen::Index i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(budget));
    for (Eigen::Index t = 0; t < budget; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hsa::detail
