#pragma once

// Exact moments: Gaussian L^p norms, Rademacher sums and even moments of
// sums of independent variables from their moment profiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "momcert/common.hpp"
#include "momcert/distmodel.hpp"

namespace momcert {

/// Weights sigma_1..sigma_n of a Rademacher sum.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
        for (double s : sigmas_)
            if (!std::isfinite(s)) throw std::invalid_argument("weights must be finite");
    }

    /// sigma_k = sqrt(v_k)
    static WeightVector from_variances(std::span<const double> variances) {
        std::vector<double> s;
        s.reserve(variances.size());
        for (double v : variances) s.push_back(std::sqrt(v));
        return WeightVector(std::move(s));
    }

    std::size_t size() const { return sigmas_.size(); }
    std::span<const double> sigmas() const { return sigmas_; }

    std::vector<double> squares() const {
        std::vector<double> out;
        out.reserve(sigmas_.size());
        for (double s : sigmas_) out.push_back(s * s);
        return out;
    }

    bool sorted_by_magnitude() const {
        for (std::size_t k = 1; k < sigmas_.size(); ++k)
            if (std::abs(sigmas_[k]) > std::abs(sigmas_[k - 1])) return false;
        return true;
    }

private:
    std::vector<double> sigmas_;
};

/// gamma_p = (E|G|^p)^{1/p} for a standard Gaussian G.
inline double gaussian_lp_norm(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("gaussian_lp_norm needs p > 0");
    const double log_moment = 0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0)) -
                              0.5 * std::log(std::numbers::pi);
    return std::exp(log_moment / p);
}

/// Largest accepted ratio between the largest and smallest variance.
inline constexpr double kMaxVarianceRange = 1e8;

namespace detail {

inline void check_dynamic_range(std::span<const MomentProfile> profiles) {
    if (profiles.empty()) return;
    double lo = profiles.front().variance(), hi = lo;
    for (const auto& p : profiles) {
        lo = std::min(lo, p.variance());
        hi = std::max(hi, p.variance());
    }
    if (hi > kMaxVarianceRange * lo)
        throw std::invalid_argument("variance dynamic range exceeds 1e8");
}

/// Binomial convolution of raw moment sequences up to order `order`.
inline std::vector<double> convolve_moments(std::span<const MomentProfile> profiles, int order) {
    std::vector<std::vector<double>> pascal(static_cast<std::size_t>(order) + 1);
    for (int t = 0; t <= order; ++t) {
        pascal[t].resize(static_cast<std::size_t>(t) + 1);
        for (int i = 0; i <= t; ++i) pascal[t][i] = binomial(t, i);
    }
    std::vector<double> acc(static_cast<std::size_t>(order) + 1, 0.0);
    acc[0] = 1.0;
    std::vector<double> next(acc.size());
    for (const auto& prof : profiles) {
        const auto mu = prof.moments();
        const bool sym = prof.symmetric();
        for (int t = 0; t <= order; ++t) {
            double s = 0.0;
            for (int i = 0; i <= t; ++i) {
                if (sym && (i % 2 == 1)) continue;
                s += pascal[t][i] * acc[t - i] * mu[i];
            }
            next[t] = s;
        }
        std::swap(acc, next);
    }
    return acc;
}

}  // namespace detail

/// E(X_1 + ... + X_n)^{2r} for independent centered X_k.
inline double sum_even_moment(std::span<const MomentProfile> profiles, int r) {
    if (r < 0) throw std::invalid_argument("moment index r must be non-negative");
    if (r == 0) return 1.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        if (profiles[k].max_order() < 2 * r)
            throw std::invalid_argument("profile " + std::to_string(k + 1) + " has max_order " +
                                        std::to_string(profiles[k].max_order()) + " < " +
                                        std::to_string(2 * r));
        if (!profiles[k].centered())
            throw std::invalid_argument("profile " + std::to_string(k + 1) + " is not centered");
    }
    detail::check_dynamic_range(profiles);
    return detail::convolve_moments(profiles, 2 * r)[2 * r];
}

/// sum_even_moment over the suffix starting at the 1-based start_index.
inline double tail_sum_even_moment(std::span<const MomentProfile> profiles, std::size_t start_index, int r) {
    if (start_index < 1 || start_index > profiles.size())
        throw std::invalid_argument("start_index " + std::to_string(start_index) + " outside 1.." +
                                    std::to_string(profiles.size()));
    return sum_even_moment(profiles.subspan(start_index - 1), r);
}

/// E(sum_k sigma_k eps_k)^{2r}.
inline double rademacher_even_moment(const WeightVector& w, int r) {
    if (r < 0) throw std::invalid_argument("moment index r must be non-negative");
    if (r == 0) return 1.0;
    std::vector<MomentProfile> profiles;
    profiles.reserve(w.size());
    for (double s : w.sigmas()) {
        if (s == 0.0) continue;
        std::vector<double> m(static_cast<std::size_t>(2 * r) + 1, 0.0);
        m[0] = 1.0;
        for (int l = 2; l <= 2 * r; l += 2) m[l] = std::pow(s * s, l / 2);
        profiles.emplace_back(std::move(m), true, true);
    }
    if (profiles.empty()) return 0.0;
    detail::check_dynamic_range(profiles);
    return detail::convolve_moments(profiles, 2 * r)[2 * r];
}

/// Largest n accepted by rademacher_abs_moment.
inline constexpr std::size_t kRademacherEnumerationCap = 24;

/// E|sum_k sigma_k eps_k|^p by enumerating the 2^{n-1} sign patterns with
/// eps_1 = +1. Shards have fixed index ranges; the result does not depend
/// on the thread count.
inline double rademacher_abs_moment(const WeightVector& w, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("rademacher_abs_moment needs p > 0");
    const std::size_t n = w.size();
    if (n == 0) return 0.0;
    if (n > kRademacherEnumerationCap)
        throw Refusal("Rademacher enumeration refused for n = " + std::to_string(n) + " > " +
                      std::to_string(kRademacherEnumerationCap) + "; use the Monte Carlo oracle");
    const auto s = w.sigmas();
    const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
    constexpr std::size_t kShards = 64;
    const std::size_t shards = static_cast<std::size_t>(std::min<std::uint64_t>(kShards, patterns));
    std::vector<double> partial(shards, 0.0);
    for_each_shard(shards, [&](std::size_t shard) {
        const std::uint64_t begin = patterns * shard / shards;
        const std::uint64_t end = patterns * (shard + 1) / shards;
        double acc = 0.0;
        for (std::uint64_t mask = begin; mask < end; ++mask) {
            double sum = s[0];
            for (std::size_t k = 1; k < n; ++k) sum += ((mask >> (k - 1)) & 1U) ? -s[k] : s[k];
            acc += std::pow(std::abs(sum), p);
        }
        partial[shard] = acc;
    });
    return pairwise_sum(partial) / static_cast<double>(patterns);
}

}  // namespace momcert
