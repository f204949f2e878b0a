#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kacpf {

/// Number of worker threads to use when the caller passes 0.
inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Evaluates fn(p) for p in [0, partitions) on up to `threads` workers and
/// returns the results indexed by partition. The partition layout is fixed by
/// the caller, so the output does not depend on the thread count.
template <typename Result, typename Fn>
std::vector<Result> run_partitions(std::size_t partitions, int threads, Fn&& fn) {
    std::vector<Result> results(partitions);
    if (threads <= 0) threads = default_thread_count();
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || partitions <= 1) {
        for (std::size_t p = 0; p < partitions; ++p) results[p] = fn(p);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t p = next++; p < partitions; p = next++) {
            try {
                results[p] = fn(p);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = partitions;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(workers, partitions); ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace kacpf
