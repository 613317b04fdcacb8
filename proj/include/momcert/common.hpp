#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace momcert {

/// Raised when an engine declines an input it cannot handle within its
/// contract (enumeration caps, missing characteristic function, ...).
/// The message names the limit and, where possible, what to use instead.
class Refusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ceiling that ignores floating-point noise just above an integer.
/// Constants such as C^2 (r-1) are mathematically integral for the
/// log-concave families but come out as 1 + 1e-16 after pow/sqrt.
inline long long ceil_snap(double x, double rel = 1e-9) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= rel * std::max(1.0, std::abs(x)))
        return static_cast<long long>(nearest);
    return static_cast<long long>(std::ceil(x));
}

/// Binomial coefficient as a double. Exact while the value stays below 2^53.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return std::round(result);
}

inline double factorial(int n) {
    double result = 1.0;
    for (int i = 2; i <= n; ++i) result *= i;
    return result;
}

/// Worker cap: MOMENT_CERT_THREADS if set and positive, otherwise the
/// hardware count.
inline unsigned worker_count() {
    if (const char* env = std::getenv("MOMENT_CERT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(shard) for shard in [0, shards) on up to worker_count()
/// threads. Callers write into per-shard slots and reduce in shard order,
/// so results never depend on the number of threads.
inline void for_each_shard(std::size_t shards, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), shards);
    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) body(s);
        return;
    }
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t s = w; s < shards; s += workers) body(s);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
}

/// Pairwise summation; order-independent of how the values were produced.
inline double pairwise_sum(const double* data, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += data[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

inline double pairwise_sum(const std::vector<double>& values) {
    return pairwise_sum(values.data(), values.size());
}

}  // namespace momcert
