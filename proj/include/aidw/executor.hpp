#pragma once

// Concurrency substrate for the per-query pipeline stages: a parallel map
// with deterministic output placement, plus wall-clock stage timing.
//
// Contract: inputs are shared read-only, every index writes only its own
// output slot, and results are identical for any worker count.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace aidw {

/// Map a requested worker count to an effective one: 0 means "all hardware
/// threads", any positive value is taken as-is.
inline int resolve_workers(int requested) {
    if (requested < 0) {
        throw std::invalid_argument("resolve_workers: worker count must be >= 0");
    }
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// result[i] = op(i) for i in [0, n), evaluated by `workers` threads that
/// claim contiguous index chunks from an atomic cursor (cache-friendly, no
/// locks on the hot path). workers == 1 degenerates to a sequential loop.
///
/// If any op throws, no further chunks are started and the exception of the
/// smallest failing index is rethrown. Chunks are claimed in ascending start
/// order and each worker stops its chunk at its first failure, so the
/// smallest recorded index is the first failing index overall.
template <typename Fn>
auto parallel_map_indexed(std::size_t n, Fn&& op, int workers, std::size_t chunk = 64) {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    static_assert(!std::is_void_v<Result>, "parallel_map_indexed: op must return a value");
    if (workers < 1) {
        throw std::invalid_argument("parallel_map_indexed: workers must be >= 1");
    }
    if (chunk == 0) {
        throw std::invalid_argument("parallel_map_indexed: chunk must be >= 1");
    }

    std::vector<Result> results(n);
    if (n == 0) {
        return results;
    }
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            results[i] = op(i);
        }
        return results;
    }

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::size_t first_failed_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr first_failure;

    auto body = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t begin = cursor.fetch_add(chunk, std::memory_order_relaxed);
            if (begin >= n) {
                break;
            }
            const std::size_t end = std::min(begin + chunk, n);
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    results[i] = op(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (i < first_failed_index) {
                        first_failed_index = i;
                        first_failure = std::current_exception();
                    }
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        }
    };

    const std::size_t max_useful = (n + chunk - 1) / chunk;
    const std::size_t thread_count = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                           max_useful);
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        pool.emplace_back(body);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_failure) {
        std::rethrow_exception(first_failure);
    }
    return results;
}

/// Result of a timed stage.
template <typename T>
struct Timed {
    T value{};
    double millis = 0.0;
    std::string label;
};

/// Run `thunk` once and measure elapsed wall-clock milliseconds on the
/// monotonic clock.
template <typename Thunk>
auto time_stage(std::string label, Thunk&& thunk) {
    using Result = std::invoke_result_t<Thunk&>;
    static_assert(!std::is_void_v<Result>, "time_stage: thunk must return a value");
    const auto start = std::chrono::steady_clock::now();
    Result value = thunk();
    const auto stop = std::chrono::steady_clock::now();
    const double millis = std::chrono::duration<double, std::milli>(stop - start).count();
    return Timed<Result>{std::move(value), millis, std::move(label)};
}

/// Per-run wall-clock record mirroring the kNN / weighted-interpolation
/// stage split. Slack (setup, ingestion, report writing) is reported
/// explicitly so total >= knn + interp - slack holds by construction.
struct StageTimings {
    std::size_t m = 0;
    std::size_t n = 0;
    int k = 0;
    int worker_count = 1;
    double build_millis = 0.0;   ///< grid construction (grid engine only)
    double knn_millis = 0.0;
    double interp_millis = 0.0;
    double total_millis = 0.0;

    [[nodiscard]] double slack_millis() const noexcept {
        return total_millis - knn_millis - interp_millis;
    }
};

}  // namespace aidw
