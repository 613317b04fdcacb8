#pragma once

// Random inputs and brute-force reference computations shared by the tests.
// Nothing here calls the library routine it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "momcert/distmodel.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int integer(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// A random symmetric family variable with standard deviation in [0.2, 2].
inline momcert::VariableSpec random_family(Rng& rng, bool with_three_point = true) {
    const double s = uniform(rng, 0.2, 2.0);
    switch (integer(rng, 0, with_three_point ? 4 : 3)) {
        case 0: return momcert::VariableSpec::gaussian(s);
        case 1: return momcert::VariableSpec::rademacher(s);
        case 2: return momcert::VariableSpec::symmetric_exponential(s);
        case 3: return momcert::VariableSpec::uniform(s * std::sqrt(3.0));
        default: {
            const double q = uniform(rng, 0.02, 0.5);
            return momcert::VariableSpec::symmetric_three_point(s / std::sqrt(2.0 * q), q);
        }
    }
}

inline momcert::VariableSpec random_log_concave(Rng& rng) {
    const double s = uniform(rng, 0.2, 2.0);
    switch (integer(rng, 0, 3)) {
        case 0: return momcert::VariableSpec::gaussian(s);
        case 1: return momcert::VariableSpec::rademacher(s);
        case 2: return momcert::VariableSpec::symmetric_exponential(s);
        default: return momcert::VariableSpec::uniform(s * std::sqrt(3.0));
    }
}

struct AtomLaw {
    std::vector<double> values;
    std::vector<double> probs;
};

/// A centered, generally asymmetric law on 2..4 atoms.
inline AtomLaw random_centered_atoms(Rng& rng) {
    AtomLaw law;
    const int k = integer(rng, 2, 4);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        law.values.push_back(uniform(rng, -2.0, 2.0));
        law.probs.push_back(uniform(rng, 0.1, 1.0));
        total += law.probs.back();
    }
    double mean = 0.0;
    for (int i = 0; i < k; ++i) {
        law.probs[i] /= total;
        mean += law.probs[i] * law.values[i];
    }
    double var = 0.0;
    for (int i = 0; i < k; ++i) var += law.probs[i] * (law.values[i] - mean) * (law.values[i] - mean);
    // Rescale to a standard deviation in [0.2, 2] so nearly degenerate draws
    // do not blow up the variance range.
    const double scale = var > 0.0 ? uniform(rng, 0.2, 2.0) / std::sqrt(var) : 1.0;
    for (auto& v : law.values) v = (v - mean) * scale;
    double residual = 0.0;
    for (int i = 0; i < k; ++i) residual += law.probs[i] * law.values[i];
    for (auto& v : law.values) v -= residual;
    return law;
}

inline momcert::VariableSpec raw_from_atoms(const AtomLaw& law, int max_order) {
    return momcert::VariableSpec::raw_moments(momcert::profile_from_atoms(law.values, law.probs, max_order));
}

/// Calls visit on every n-tuple of non-negative integers summing to total,
/// each entry at least `min_part` when nonzero.
inline void compositions(int n, int total, int min_part, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == n - 1) {
            if (left == 0 || left >= min_part) {
                a[pos] = left;
                visit(a);
            }
            return;
        }
        for (int v = 0; v <= left; ++v) {
            if (v > 0 && v < min_part) continue;
            a[pos] = v;
            rec(pos + 1, left - v);
        }
        a[pos] = 0;
    };
    rec(0, total);
}

inline double factorial(int n) {
    double f = 1.0;
    for (int j = 2; j <= n; ++j) f *= j;
    return f;
}

/// sum over |alpha| = r of (2r)!/(2 alpha)! prod mu^{(k)}_{2 alpha_k}.
inline double symmetric_multi_index_moment(const std::vector<momcert::MomentProfile>& profiles, int r) {
    double total = 0.0;
    compositions(static_cast<int>(profiles.size()), r, 1, [&](const std::vector<int>& a) {
        double term = factorial(2 * r);
        for (std::size_t k = 0; k < a.size(); ++k) term *= profiles[k][2 * a[k]] / factorial(2 * a[k]);
        total += term;
    });
    return total;
}

/// sum over |alpha| = 2r without singletons of (2r)!/alpha! prod mu^{(k)}_{alpha_k}.
inline double centered_multi_index_moment(const std::vector<momcert::MomentProfile>& profiles, int r) {
    double total = 0.0;
    compositions(static_cast<int>(profiles.size()), 2 * r, 2, [&](const std::vector<int>& a) {
        double term = factorial(2 * r);
        for (std::size_t k = 0; k < a.size(); ++k) term *= profiles[k][a[k]] / factorial(a[k]);
        total += term;
    });
    return total;
}

/// e_r by summing over all r-subsets.
inline double subset_elementary_symmetric(const std::vector<double>& v, int r) {
    const int n = static_cast<int>(v.size());
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        if (__builtin_popcount(mask) != r) continue;
        double prod = 1.0;
        for (int k = 0; k < n; ++k)
            if (mask & (1U << k)) prod *= v[k];
        total += prod;
    }
    return total;
}

/// E|sum sigma_k eps_k|^p over all 2^n sign vectors (no halving).
inline double all_signs_abs_moment(const std::vector<double>& sigma, double p) {
    const int n = static_cast<int>(sigma.size());
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += (mask & (1U << k)) ? sigma[k] : -sigma[k];
        total += std::pow(std::abs(s), p);
    }
    return total / static_cast<double>(1U << n);
}

inline bool near_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testsupport
