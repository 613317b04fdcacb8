#pragma once

// Multi-index algebra, constrained compositions and elementary symmetric
// polynomials.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "momcert/common.hpp"

namespace momcert {

using BigInt = boost::multiprecision::cpp_int;

/// An n-tuple of non-negative integers. Positions are 0-based in code;
/// "index k" in the docs below means entries()[k - 1].
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int a : entries_)
            if (a < 0) throw std::invalid_argument("multi-index entries must be non-negative");
    }

    std::size_t size() const { return entries_.size(); }
    int operator[](std::size_t k) const { return entries_[k]; }
    const std::vector<int>& entries() const { return entries_; }

    /// |alpha|
    int total() const { return partial(entries_.size()); }

    /// |alpha|_i, the sum of the first i entries.
    int partial(std::size_t i) const {
        int s = 0;
        for (std::size_t k = 0; k < i && k < entries_.size(); ++k) s += entries_[k];
        return s;
    }

    /// alpha!
    BigInt factorial() const {
        BigInt f = 1;
        for (int a : entries_)
            for (int j = 2; j <= a; ++j) f *= j;
        return f;
    }

    /// s(alpha): positions with a nonzero entry.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t k = 0; k < entries_.size(); ++k)
            if (entries_[k] != 0) s.push_back(k);
        return s;
    }

    /// sing(alpha): positions whose entry equals 1.
    std::vector<std::size_t> singletons() const {
        std::vector<std::size_t> s;
        for (std::size_t k = 0; k < entries_.size(); ++k)
            if (entries_[k] == 1) s.push_back(k);
        return s;
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.entries_ <=> b.entries_; }

private:
    std::vector<int> entries_;
};

/// Constraint set for enumerate(). support, when given, fixes s(alpha)
/// exactly (0-based positions).
struct IndexConstraint {
    int total = 0;
    std::optional<int> support_size;
    bool no_singletons = false;
    std::optional<std::vector<std::size_t>> support;
};

/// Visits every multi-index of length n satisfying the constraint exactly
/// once, in ascending lexicographic order.
inline void enumerate(int n, const IndexConstraint& c, const std::function<void(const MultiIndex&)>& visit) {
    if (n < 1) throw std::invalid_argument("multi-index length must be at least 1");
    if (c.total < 0) return;
    std::vector<char> allowed(static_cast<std::size_t>(n), 1);
    std::vector<char> required(static_cast<std::size_t>(n), 0);
    if (c.support) {
        std::fill(allowed.begin(), allowed.end(), 0);
        for (std::size_t k : *c.support) {
            if (k >= static_cast<std::size_t>(n)) return;
            allowed[k] = required[k] = 1;
        }
    }
    const int min_part = c.no_singletons ? 2 : 1;
    std::vector<int> cur(static_cast<std::size_t>(n), 0);

    std::function<void(int, int, int)> rec = [&](int pos, int remaining, int used) {
        if (pos == n) {
            if (remaining != 0) return;
            if (c.support_size && used != *c.support_size) return;
            visit(MultiIndex(cur));
            return;
        }
        if (c.support_size && used > *c.support_size) return;
        const bool must = required[pos];
        if (!must) {
            cur[pos] = 0;
            rec(pos + 1, remaining, used);
        }
        if (!allowed[pos]) return;
        for (int a = min_part; a <= remaining; ++a) {
            cur[pos] = a;
            rec(pos + 1, remaining - a, used + 1);
        }
        cur[pos] = 0;
    };
    rec(0, c.total, 0);
}

inline std::vector<MultiIndex> enumerate_all(int n, const IndexConstraint& c) {
    std::vector<MultiIndex> out;
    enumerate(n, c, [&](const MultiIndex& a) { out.push_back(a); });
    return out;
}

/// Ways to put r indistinguishable balls into i urns, none empty:
/// C(r-1, r-i).
inline std::uint64_t count_support_compositions(int r, int i) {
    if (i < 1 || i > r) throw std::invalid_argument("need 1 <= i <= r");
    return static_cast<std::uint64_t>(binomial(r - 1, r - i));
}

/// Ways to put 2r balls into i urns with at least two in each urn:
/// C(2r-i-1, 2(r-i)).
inline std::uint64_t count_no_singleton_compositions(int r, int i) {
    if (i < 1 || i > r) throw std::invalid_argument("need 1 <= i <= r");
    return static_cast<std::uint64_t>(binomial(2 * r - i - 1, 2 * (r - i)));
}

/// total! / parts!, exactly.
inline BigInt multinomial(int total, const MultiIndex& parts) {
    if (parts.total() != total)
        throw std::invalid_argument("multinomial parts sum to " + std::to_string(parts.total()) +
                                    ", expected " + std::to_string(total));
    BigInt num = 1;
    for (int j = 2; j <= total; ++j) num *= j;
    return num / parts.factorial();
}

/// All e_0..e_rmax of the values via the column recurrence
/// e_j <- e_j + v * e_{j-1}.
inline std::vector<double> elementary_symmetric_all(std::span<const double> values, int rmax) {
    std::vector<double> e(static_cast<std::size_t>(std::max(rmax, 0)) + 1, 0.0);
    e[0] = 1.0;
    int filled = 0;
    for (double v : values) {
        filled = std::min(filled + 1, rmax);
        for (int j = filled; j >= 1; --j) e[j] += v * e[j - 1];
    }
    return e;
}

struct SymmetricSum {
    double value;
    bool empty;  ///< r > n: the sum has no terms
};

/// e_r(values). Returns 0 flagged empty when r exceeds the number of values.
inline SymmetricSum elementary_symmetric_checked(std::span<const double> values, int r) {
    if (r < 0) throw std::invalid_argument("elementary symmetric order must be non-negative");
    if (static_cast<std::size_t>(r) > values.size()) return {0.0, true};
    return {elementary_symmetric_all(values, r)[r], false};
}

inline double elementary_symmetric(std::span<const double> values, int r) {
    return elementary_symmetric_checked(values, r).value;
}

}  // namespace momcert
