#pragma once

// Ground truth independent of the bound engine: exhaustive convolution of
// finite supports, seeded Monte Carlo with confidence intervals, and the
// report verifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "momcert/bounds.hpp"
#include "momcert/charfn.hpp"
#include "momcert/common.hpp"
#include "momcert/distmodel.hpp"
#include "momcert/exactmoments.hpp"

namespace momcert {

using Atoms = std::vector<std::pair<double, double>>;  ///< (value, probability)

/// Largest product of support sizes accepted by the exact convolution.
inline constexpr double kMaxSupportProduct = 2e7;

/// E|sum_k X_k|^p for independent finitely supported X_k.
inline double atoms_abs_moment(std::span<const Atoms> laws, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
    double product = 1.0;
    for (const auto& a : laws) product *= static_cast<double>(a.size());
    if (product > kMaxSupportProduct)
        throw Refusal("exact convolution refused: support product " + std::to_string(product) +
                      " exceeds " + std::to_string(kMaxSupportProduct));
    Atoms acc{{0.0, 1.0}};
    Atoms next;
    for (const auto& law : laws) {
        next.clear();
        next.reserve(acc.size() * law.size());
        for (const auto& [x, px] : acc)
            for (const auto& [y, py] : law) next.emplace_back(x + y, px * py);
        std::sort(next.begin(), next.end());
        acc.clear();
        for (const auto& atom : next) {
            if (!acc.empty() && acc.back().first == atom.first) acc.back().second += atom.second;
            else acc.push_back(atom);
        }
    }
    std::vector<double> terms;
    terms.reserve(acc.size());
    for (const auto& [x, px] : acc) terms.push_back(px * std::pow(std::abs(x), p));
    std::sort(terms.begin(), terms.end());
    return pairwise_sum(terms);
}

inline bool all_finite_support(std::span<const VariableSpec> specs) {
    return std::all_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.atoms().has_value(); });
}

/// E|sum_k X_k|^p for finitely supported family variables.
inline double exact_discrete_moment(std::span<const VariableSpec> specs, double p) {
    std::vector<Atoms> laws;
    for (const auto& s : specs) {
        auto a = s.atoms();
        if (!a) throw std::invalid_argument(s.family_name() + " does not have finite support");
        laws.push_back(std::move(*a));
    }
    return atoms_abs_moment(laws, p);
}

struct MCEstimate {
    double p = 0.0;
    double point = 0.0;       ///< estimate of ||S||_p
    double half_width = 0.0;  ///< max distance from point to a CI endpoint
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double moment_mean = 0.0;  ///< estimate of E|S|^p
    double moment_se = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double confidence = 0.0;

    friend bool operator==(const MCEstimate&, const MCEstimate&) = default;
};

/// Number of independent random streams; fixed so results do not depend on
/// the thread count.
inline constexpr std::size_t kMonteCarloShards = 64;

/// Seeded Monte Carlo estimate of ||sum_k X_k||_p with a normal-theory
/// interval on E|S|^p mapped through t -> t^{1/p}.
inline MCEstimate mc_moment(std::span<const VariableSpec> specs, double p, std::size_t samples, std::uint64_t seed,
                            double confidence = 0.999) {
    if (samples < 10000) throw std::invalid_argument("Monte Carlo needs at least 10^4 samples");
    if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
    for (const auto& s : specs)
        if (s.is_raw()) throw Refusal("Monte Carlo cannot sample a raw moment profile");

    const std::vector<VariableSpec> vars(specs.begin(), specs.end());
    std::vector<double> sums(kMonteCarloShards), sq(kMonteCarloShards);
    for_each_shard(kMonteCarloShards, [&](std::size_t shard) {
        const std::size_t begin = samples * shard / kMonteCarloShards;
        const std::size_t end = samples * (shard + 1) / kMonteCarloShards;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(shard), 0x6d6f6dU};
        std::mt19937_64 engine(seq);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            double x = 0.0;
            for (const auto& v : vars) x += Sampler::draw(v, engine);
            const double y = std::pow(std::abs(x), p);
            s += y;
            s2 += y * y;
        }
        sums[shard] = s;
        sq[shard] = s2;
    });
    const double nn = static_cast<double>(samples);
    const double mean = pairwise_sum(sums) / nn;
    const double var = std::max(pairwise_sum(sq) / nn - mean * mean, 0.0) * nn / (nn - 1.0);
    const double se = std::sqrt(var / nn);
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * confidence);

    MCEstimate est;
    est.p = p;
    est.samples = samples;
    est.seed = seed;
    est.confidence = confidence;
    est.moment_mean = mean;
    est.moment_se = se;
    est.point = std::pow(mean, 1.0 / p);
    est.ci_lower = std::pow(std::max(mean - z * se, 0.0), 1.0 / p);
    est.ci_upper = std::pow(mean + z * se, 1.0 / p);
    est.half_width = std::max(est.point - est.ci_lower, est.ci_upper - est.point);
    if (!(est.half_width > 0.0)) est.half_width = std::numeric_limits<double>::min();
    return est;
}

/// An oracle value with its error interval, in the units of `quantity`.
struct Ground {
    double p = 0.0;
    Quantity quantity = Quantity::Norm;
    std::size_t truncation_start = 1;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::string provenance;  ///< exact | quadrature | mc

    double error() const { return std::max(value - lo, hi - value); }
};

struct OracleOptions {
    double tol = 1e-9;
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
    double confidence = 0.999;
};

namespace detail {

inline Ground exact_ground(double moment, double p, Quantity q) {
    Ground g;
    g.p = p;
    g.quantity = q;
    g.provenance = "exact";
    const double rel = 1e-12;
    if (q == Quantity::Norm) {
        g.value = std::pow(moment, 1.0 / p);
    } else {
        g.value = moment;
    }
    g.lo = g.value * (1.0 - rel);
    g.hi = g.value * (1.0 + rel);
    return g;
}

}  // namespace detail

/// Ground truth for E|sum_k X_k|^p (or its p-th root). Picks the first
/// applicable engine: even-moment recursion, finite-support convolution,
/// characteristic-function quadrature, Monte Carlo.
inline Ground ground_truth(std::span<const VariableSpec> specs, double p, Quantity q, const OracleOptions& opts = {}) {
    if (specs.empty()) throw std::invalid_argument("empty sum");
    const bool even = p == std::floor(p) && static_cast<long long>(p) % 2 == 0;
    const bool centered = std::all_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.centered(); });
    if (even && centered) {
        const int r = static_cast<int>(p / 2);
        std::vector<MomentProfile> profiles;
        bool available = true;
        for (const auto& s : specs) {
            if (s.is_raw() && std::get<family::RawMoments>(s.law()).profile.max_order() < 2 * r) {
                available = false;
                break;
            }
            profiles.push_back(moments_of(s, 2 * r));
        }
        if (available) return detail::exact_ground(sum_even_moment(profiles, r), p, q);
    }
    if (all_finite_support(specs)) {
        double product = 1.0;
        for (const auto& s : specs) product *= static_cast<double>(s.atoms()->size());
        if (product <= kMaxSupportProduct) return detail::exact_ground(exact_discrete_moment(specs, p), p, q);
    }
    const bool families = std::none_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.is_raw(); });
    if (p > 2.0 && p < 4.0 && families) {
        const auto res = sum_abs_moment_via_haagerup(specs, p, opts.tol);
        Ground g;
        g.p = p;
        g.quantity = q;
        g.provenance = "quadrature";
        const double lo = std::max(res.value - res.total_error(), 0.0);
        const double hi = res.value + res.total_error();
        if (q == Quantity::Norm) {
            g.value = std::pow(res.value, 1.0 / p);
            g.lo = std::pow(lo, 1.0 / p);
            g.hi = std::pow(hi, 1.0 / p);
        } else {
            g.value = res.value;
            g.lo = lo;
            g.hi = hi;
        }
        return g;
    }
    if (!families) throw Refusal("no oracle applies to raw moment profiles at p = " + std::to_string(p));
    const auto est = mc_moment(specs, p, opts.samples, opts.seed, opts.confidence);
    Ground g;
    g.p = p;
    g.quantity = q;
    g.provenance = "mc";
    if (q == Quantity::Norm) {
        g.value = est.point;
        g.lo = est.ci_lower;
        g.hi = est.ci_upper;
    } else {
        const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * opts.confidence);
        g.value = est.moment_mean;
        g.lo = std::max(est.moment_mean - z * est.moment_se, 0.0);
        g.hi = est.moment_mean + z * est.moment_se;
    }
    return g;
}

/// Ground truth matching what a report bounds (full sum or its truncation).
inline Ground ground_truth_for(const SequenceSpec& seq, const BoundReport& report, const OracleOptions& opts = {}) {
    const std::size_t start = report.quantity == Quantity::TruncatedPthMoment ? report.truncation_start : 1;
    if (start < 1 || start > seq.size()) throw std::invalid_argument("truncation start outside the sequence");
    auto g = ground_truth(seq.variables().subspan(start - 1), report.p, report.quantity, opts);
    g.truncation_start = start;
    return g;
}

struct Verdict {
    bool pass = false;
    double margin = 0.0;  ///< distance to the nearest violated side; negative on FAIL
    std::string detail;
};

/// PASS when the ground interval meets [lower, upper].
inline Verdict verify_report(const BoundReport& report, const Ground& ground) {
    if (!report.certifying) throw std::invalid_argument("cannot verify a non-certifying report");
    if (ground.p != report.p || ground.quantity != report.quantity)
        throw std::invalid_argument("ground truth targets a different p or quantity");
    if (report.quantity == Quantity::TruncatedPthMoment && ground.truncation_start != report.truncation_start)
        throw std::invalid_argument("ground truth targets a different truncation");
    Verdict v;
    double margin = std::numeric_limits<double>::infinity();
    if (report.lower) margin = std::min(margin, ground.hi - *report.lower);
    if (report.upper) margin = std::min(margin, *report.upper - ground.lo);
    v.margin = margin;
    v.pass = margin >= 0.0;
    if (!v.pass) {
        v.detail = "ground [" + std::to_string(ground.lo) + ", " + std::to_string(ground.hi) + "] outside [" +
                   (report.lower ? std::to_string(*report.lower) : std::string("-inf")) + ", " +
                   (report.upper ? std::to_string(*report.upper) : std::string("inf")) + "]";
    }
    return v;
}

}  // namespace momcert
