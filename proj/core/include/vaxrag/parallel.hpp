#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

#include "vaxrag/error.hpp"

namespace vaxrag {

/// Applies `fn(i)` for i in [0, n) with at most `max_in_flight` concurrent
/// calls. Results land at their input position, so the output order never
/// depends on completion order. The first exception thrown by `fn` is
/// rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t max_in_flight, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<R>> slots(n);
    const std::size_t workers = std::min(std::max<std::size_t>(1, max_in_flight), n);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            slots[i].emplace(fn(i));
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::atomic<bool> failed{false};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        std::mutex error_mutex;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n && !failed.load(); i = next.fetch_add(1)) {
                    try {
                        slots[i].emplace(fn(i));
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) {
                            first_error = std::current_exception();
                        }
                        failed.store(true);
                    }
                }
            });
        }
        pool.clear();
        if (first_error) {
            std::rethrow_exception(first_error);
        }
    }

    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
};

/// Bounded fan-out used wherever provider calls run per item.
struct FanOutOptions {
    std::size_t max_in_flight = 8;
    RetryPolicy retry{};
};

/// Calls `fn` until it succeeds, retrying retryable ProviderErrors with
/// exponential backoff. The last error propagates.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> std::invoke_result_t<Fn&> {
    auto delay = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= std::max(1, policy.max_attempts)) {
                throw;
            }
        }
        if (delay.count() > 0) {
            std::this_thread::sleep_for(delay);
        }
        delay = std::chrono::milliseconds(static_cast<long long>(delay.count() * policy.multiplier));
    }
}

} // namespace vaxrag
