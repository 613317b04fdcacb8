#pragma once

// Certified two-sided bounds on ||X_1 + ... + X_n||_p around the Gaussian
// value gamma_p (sum E X_k^2)^{1/2}, with the constants (m, C, cutoffs)
// they depend on and an assumption ledger per report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "momcert/charfn.hpp"
#include "momcert/combinatorics.hpp"
#include "momcert/common.hpp"
#include "momcert/distmodel.hpp"
#include "momcert/exactmoments.hpp"

namespace momcert {

/// Independent variables ordered by nonincreasing variance. The order the
/// caller supplied is kept in permutation(): sorted position j holds the
/// caller's variable permutation()[j] (0-based).
class SequenceSpec {
public:
    explicit SequenceSpec(std::vector<VariableSpec> variables) {
        if (variables.empty()) throw std::invalid_argument("a sequence needs at least one variable");
        perm_.resize(variables.size());
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        std::vector<double> var(variables.size());
        for (std::size_t k = 0; k < variables.size(); ++k) var[k] = variables[k].variance();
        std::stable_sort(perm_.begin(), perm_.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
        caller_sorted_ = std::is_sorted(perm_.begin(), perm_.end());
        for (std::size_t j : perm_) {
            vars_.push_back(variables[j]);
            variances_.push_back(var[j]);
        }
    }

    std::size_t size() const { return vars_.size(); }
    std::span<const VariableSpec> variables() const { return vars_; }
    std::span<const double> variances() const { return variances_; }
    const std::vector<std::size_t>& permutation() const { return perm_; }
    bool caller_sorted() const { return caller_sorted_; }

    double total_variance() const { return std::accumulate(variances_.begin(), variances_.end(), 0.0); }
    double max_variance() const { return variances_.front(); }

    /// Sum of variances from the 1-based index `from` onwards.
    double variance_from(std::size_t from) const {
        double s = 0.0;
        for (std::size_t k = from; k <= vars_.size(); ++k) s += variances_[k - 1];
        return s;
    }

    bool all_symmetric() const {
        return std::all_of(vars_.begin(), vars_.end(), [](const VariableSpec& v) { return v.symmetric(); });
    }
    bool all_centered() const {
        return std::all_of(vars_.begin(), vars_.end(), [](const VariableSpec& v) { return v.centered(); });
    }
    bool all_log_concave() const {
        return std::all_of(vars_.begin(), vars_.end(), [](const VariableSpec& v) { return v.log_concave_tail(); });
    }

    std::vector<MomentProfile> profiles(int order) const {
        std::vector<MomentProfile> out;
        out.reserve(vars_.size());
        for (const auto& v : vars_) out.push_back(moments_of(v, order));
        return out;
    }

    SequenceSpec prefix(std::size_t count) const {
        return SequenceSpec({vars_.begin(), vars_.begin() + static_cast<std::ptrdiff_t>(std::min(count, vars_.size()))});
    }
    SequenceSpec suffix_from(std::size_t from) const {
        return SequenceSpec({vars_.begin() + static_cast<std::ptrdiff_t>(from - 1), vars_.end()});
    }

private:
    std::vector<VariableSpec> vars_;
    std::vector<double> variances_;
    std::vector<std::size_t> perm_;
    bool caller_sorted_ = true;
};

/// What lower/upper refer to.
enum class Quantity {
    Norm,                  ///< ||S||_p
    TruncatedPthMoment,    ///< E|X_c + ... + X_n|^p with c = truncation_start
};

struct BoundReport {
    std::string statement_id;
    double p = 0.0;
    std::optional<int> r;
    std::size_t n = 0;
    Quantity quantity = Quantity::Norm;
    double center = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<double> radius;
    std::map<std::string, double> constants;
    std::map<std::string, double> auxiliary;
    std::vector<Condition> assumptions;
    bool certifying = false;
    std::size_t truncation_start = 1;
    std::vector<std::size_t> permutation;
    /// "exact" unless a bound value depends on a numerical head term.
    std::string provenance = "exact";
    double bound_error = 0.0;

    std::string failed_assumptions() const {
        std::string out;
        for (const auto& a : assumptions)
            if (!a.satisfied) out += (out.empty() ? "" : "; ") + a.name + (a.detail.empty() ? "" : " (" + a.detail + ")");
        return out;
    }
};

namespace detail {

inline BoundReport base_report(std::string id, const SequenceSpec& seq, double p) {
    BoundReport rep;
    rep.statement_id = std::move(id);
    rep.p = p;
    rep.n = seq.size();
    rep.center = gaussian_lp_norm(p) * std::sqrt(seq.total_variance());
    rep.permutation = seq.permutation();
    return rep;
}

/// Marks the report certifying iff every assumption holds; otherwise
/// clears all bound values.
inline BoundReport& finalize(BoundReport& rep) {
    rep.certifying = std::all_of(rep.assumptions.begin(), rep.assumptions.end(),
                                 [](const Condition& c) { return c.satisfied; });
    if (!rep.certifying) {
        rep.lower.reset();
        rep.upper.reset();
        rep.radius.reset();
    }
    return rep;
}

inline double snap_to_one(double c) { return c < 1.0 + 1e-12 ? 1.0 : c; }

inline bool is_even_integer(double p) { return p == std::floor(p) && static_cast<long long>(p) % 2 == 0; }

}  // namespace detail

/// m = max_k ceil(E X_k^4 / (6 (E X_k^2)^2)).
inline int compute_m(const SequenceSpec& seq) {
    long long m = 0;
    for (const auto& v : seq.variables()) {
        const auto prof = moments_of(v, 4);
        m = std::max(m, ceil_snap(prof[4] / (prof[2] * prof[2]) / 6.0));
    }
    return static_cast<int>(m);
}

/// Least C >= 1 with E X_k^{2l} <= C^{2l-2} (2l)!/2^l (E X_k^2)^l, 2 <= l <= r.
inline double minimal_C_symmetric(const SequenceSpec& seq, int r) {
    if (!seq.all_symmetric()) throw std::invalid_argument("minimal_C_symmetric needs symmetric variables");
    double c = 1.0;
    for (const auto& v : seq.variables()) {
        const auto prof = moments_of(v, std::max(2 * r, 2));
        for (int l = 2; l <= r; ++l) {
            const double ratio = prof[2 * l] * std::ldexp(1.0, l) / (factorial(2 * l) * std::pow(prof[2], l));
            c = std::max(c, std::pow(ratio, 1.0 / (2 * l - 2)));
        }
    }
    return detail::snap_to_one(c);
}

/// Least C >= 1 with |E X_k^l| <= C^{l-2} l!/2^{l/2} (E X_k^2)^{l/2}, 3 <= l <= 2r.
inline double minimal_C_centered(const SequenceSpec& seq, int r) {
    if (!seq.all_centered()) throw std::invalid_argument("minimal_C_centered needs centered variables");
    double c = 1.0;
    for (const auto& v : seq.variables()) {
        const auto prof = moments_of(v, std::max(2 * r, 2));
        for (int l = 3; l <= 2 * r; ++l) {
            const double ratio = std::abs(prof[l]) * std::pow(2.0, 0.5 * l) /
                                 (factorial(l) * std::pow(prof[2], 0.5 * l));
            if (ratio > 0.0) c = std::max(c, std::pow(ratio, 1.0 / (l - 2)));
        }
    }
    return detail::snap_to_one(c);
}

/// Two-sided bounds for 2 <= p <= 4 on symmetric variables with
/// m = compute_m < n; radius sqrt(3m) ||X_1||_2.
inline BoundReport bound_p_2_4(const SequenceSpec& seq, double p) {
    if (!(p >= 2.0 && p <= 4.0)) throw std::invalid_argument("bound_p_2_4 needs 2 <= p <= 4");
    if (!seq.all_symmetric()) throw std::invalid_argument("bound_p_2_4 needs symmetric variables");
    auto rep = detail::base_report("two_to_four", seq, p);
    const int m = compute_m(seq);
    const std::size_t n = seq.size();
    rep.constants["m"] = m;
    rep.assumptions.push_back({"m < n", static_cast<std::size_t>(m) < n,
                               "m = " + std::to_string(m) + ", n = " + std::to_string(n)});
    const double gp = gaussian_lp_norm(p);
    const double top = std::sqrt(seq.max_variance());
    rep.radius = std::sqrt(3.0 * m) * top;
    rep.lower = gp * std::sqrt(seq.variance_from(2));
    rep.upper = rep.center + *rep.radius;
    rep.auxiliary["lower_radius"] = std::pow(3.0, 0.25) * top;
    return detail::finalize(rep);
}

/// Even moments p = 2r of symmetric variables; cutoff D = ceil(C^2 (r-1)) < n.
inline BoundReport bound_even_symmetric(const SequenceSpec& seq, int r) {
    if (r < 2) throw std::invalid_argument("bound_even_symmetric needs r >= 2");
    auto rep = detail::base_report("even_symmetric", seq, 2.0 * r);
    rep.r = r;
    const bool sym = seq.all_symmetric();
    rep.assumptions.push_back({"symmetric variables", sym, ""});
    if (!sym) return detail::finalize(rep);
    const double c = minimal_C_symmetric(seq, r);
    const long long d = ceil_snap(c * c * (r - 1));
    rep.constants["C"] = c;
    rep.constants["cutoff_index"] = static_cast<double>(d);
    rep.assumptions.push_back({"cutoff < n", d < static_cast<long long>(seq.size()),
                               "cutoff = " + std::to_string(d) + ", n = " + std::to_string(seq.size())});
    const double g = gaussian_lp_norm(2.0 * r);
    const double top = std::sqrt(seq.max_variance());
    rep.radius = 2.0 * static_cast<double>(d) * top;
    rep.lower = g * std::sqrt(seq.variance_from(static_cast<std::size_t>(r)));
    rep.upper = rep.center + *rep.radius;
    return detail::finalize(rep);
}

/// Upper bound for even moments of centered variables; cutoff
/// D = ceil(C^2 r(r-1)/2) < n. No lower bound.
inline BoundReport bound_even_centered(const SequenceSpec& seq, int r) {
    if (r < 2) throw std::invalid_argument("bound_even_centered needs r >= 2");
    auto rep = detail::base_report("even_centered", seq, 2.0 * r);
    rep.r = r;
    const bool centered = seq.all_centered();
    rep.assumptions.push_back({"centered variables", centered, ""});
    if (!centered) return detail::finalize(rep);
    const double c = minimal_C_centered(seq, r);
    const long long d = ceil_snap(c * c * r * (r - 1) / 2.0);
    rep.constants["C"] = c;
    rep.constants["cutoff_index"] = static_cast<double>(d);
    rep.assumptions.push_back({"cutoff < n", d < static_cast<long long>(seq.size()),
                               "cutoff = " + std::to_string(d) + ", n = " + std::to_string(seq.size())});
    rep.upper = rep.center + 2.0 * static_cast<double>(d) * std::sqrt(seq.max_variance());
    return detail::finalize(rep);
}

/// Upper bound on E|X_c + ... + X_n|^p, 2 <= p <= 2r, by
/// (2h+1)/(2h-1) E|sum_k sqrt(v_k) eps_k|^p with h = floor(p/2).
/// The bound is for the truncated sum starting at c = truncation_start.
inline BoundReport bound_general_p(const SequenceSpec& seq, double p, int r) {
    if (r < 1) throw std::invalid_argument("bound_general_p needs r >= 1");
    if (!(p >= 2.0 && p <= 2.0 * r)) throw std::invalid_argument("bound_general_p needs 2 <= p <= 2r");
    auto rep = detail::base_report("general_p_truncated", seq, p);
    rep.r = r;
    rep.quantity = Quantity::TruncatedPthMoment;
    const bool centered = seq.all_centered();
    rep.assumptions.push_back({"centered variables", centered, ""});
    if (!centered) return detail::finalize(rep);
    const int h = static_cast<int>(std::floor(p / 2.0));
    const double multiplier = (2.0 * h + 1.0) / (2.0 * h - 1.0);
    const double c = minimal_C_centered(seq, r);
    const bool sym = seq.all_symmetric();
    const long long cutoff = sym ? ceil_snap(c * c * h) + 1 : ceil_snap(c * c * h * (h + 1) / 2.0) + 1;
    rep.constants["C"] = c;
    rep.constants["multiplier"] = multiplier;
    rep.constants["cutoff_index"] = static_cast<double>(cutoff);
    rep.truncation_start = static_cast<std::size_t>(cutoff);
    rep.assumptions.push_back({"cutoff <= n", cutoff <= static_cast<long long>(seq.size()),
                               "cutoff = " + std::to_string(cutoff) + ", n = " + std::to_string(seq.size())});
    const auto w = WeightVector::from_variances(seq.variances());
    const bool even = detail::is_even_integer(p);
    const bool enumerable = w.size() <= kRademacherEnumerationCap;
    rep.assumptions.push_back({"Rademacher moment computable", even || enumerable,
                               even ? "" : "n above the enumeration cap"});
    if (even)
        rep.upper = multiplier * rademacher_even_moment(w, static_cast<int>(p / 2));
    else if (enumerable)
        rep.upper = multiplier * rademacher_abs_moment(w, p);
    return detail::finalize(rep);
}

struct BigLemmaReport {
    double lhs = 0.0;    ///< (2r+1)/(2r-1) M_{2r}^2
    double rhs = 0.0;    ///< (2r+2)!/2^{r+1} e_{r+1}(sigma^2) M_{2r-2}
    double ratio = 0.0;  ///< lhs / rhs, +inf when rhs = 0
    bool satisfied = false;
};

/// Rademacher moment inequality between consecutive even orders; weights
/// must be sorted by nonincreasing magnitude.
inline BigLemmaReport check_big_lemma(const WeightVector& w, int r) {
    if (r < 1) throw std::invalid_argument("check_big_lemma needs r >= 1");
    if (!w.sorted_by_magnitude()) throw std::invalid_argument("weights must be sorted by nonincreasing magnitude");
    const double m2r = rademacher_even_moment(w, r);
    const double m2r2 = rademacher_even_moment(w, r - 1);
    const auto sq = w.squares();
    const double e = elementary_symmetric(sq, r + 1);
    BigLemmaReport rep;
    rep.lhs = (2.0 * r + 1.0) / (2.0 * r - 1.0) * m2r * m2r;
    rep.rhs = factorial(2 * r + 2) / std::ldexp(1.0, r + 1) * e * m2r2;
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : std::numeric_limits<double>::infinity();
    rep.satisfied = rep.lhs >= rep.rhs * (1.0 - 1e-12);
    return rep;
}

struct TailInequalityReport {
    bool applicable = false;
    double C = 1.0;
    long long cutoff = 0;              ///< D; the tail starts at D + 1
    double tail_moment = 0.0;          ///< E(sum_{k>D} X_k)^{2r}
    double symmetric_sum_bound = 0.0;  ///< (2r)!/2^r e_r(v)
    double rademacher_bound = 0.0;     ///< E(sum_k sqrt(v_k) eps_k)^{2r}
    bool satisfied = true;
};

namespace detail {

inline TailInequalityReport tail_check(const SequenceSpec& seq, int r, double c, long long d) {
    TailInequalityReport rep;
    rep.C = c;
    rep.cutoff = d;
    rep.applicable = d < static_cast<long long>(seq.size());
    if (!rep.applicable) return rep;
    const auto profiles = seq.profiles(2 * r);
    rep.tail_moment = tail_sum_even_moment(profiles, static_cast<std::size_t>(d + 1), r);
    rep.symmetric_sum_bound = factorial(2 * r) / std::ldexp(1.0, r) * elementary_symmetric(seq.variances(), r);
    rep.rademacher_bound = rademacher_even_moment(WeightVector::from_variances(seq.variances()), r);
    const double slack = 1e-10;
    rep.satisfied = rep.tail_moment <= rep.symmetric_sum_bound * (1.0 + slack) &&
                    rep.symmetric_sum_bound <= rep.rademacher_bound * (1.0 + slack);
    return rep;
}

}  // namespace detail

/// Tail of a symmetric sequence past ceil(C^2 (r-1)) against
/// (2r)!/2^r e_r(v) and against the Rademacher moment.
inline TailInequalityReport check_tail_symmetric(const SequenceSpec& seq, int r) {
    if (r < 2) throw std::invalid_argument("tail check needs r >= 2");
    const double c = minimal_C_symmetric(seq, r);
    return detail::tail_check(seq, r, c, ceil_snap(c * c * (r - 1)));
}

/// Same for centered sequences with cutoff ceil(C^2 r(r-1)/2).
inline TailInequalityReport check_tail_centered(const SequenceSpec& seq, int r) {
    if (r < 2) throw std::invalid_argument("tail check needs r >= 2");
    const double c = minimal_C_centered(seq, r);
    return detail::tail_check(seq, r, c, ceil_snap(c * c * r * (r - 1) / 2.0));
}

struct HeadNorm {
    double lo = 0.0;
    double hi = 0.0;
    std::string provenance = "exact";
};

/// ||X_1 + ... + X_j||_p for symmetric family variables: exact at even p,
/// quadrature on (2, 4), otherwise bracketed by log-convexity between the
/// neighbouring even moments.
inline HeadNorm head_norm(const SequenceSpec& head, double p, double tol = 1e-10) {
    HeadNorm out;
    if (detail::is_even_integer(p)) {
        const int r = static_cast<int>(p / 2);
        const double v = std::pow(sum_even_moment(head.profiles(2 * r), r), 1.0 / p);
        out.lo = out.hi = v;
        return out;
    }
    if (p > 2.0 && p < 4.0) {
        const auto res = sum_abs_moment_via_haagerup(head.variables(), p, tol);
        out.lo = std::pow(std::max(res.value - res.total_error(), 0.0), 1.0 / p);
        out.hi = std::pow(res.value + res.total_error(), 1.0 / p);
        out.provenance = "quadrature";
        return out;
    }
    const int h = static_cast<int>(std::floor(p / 2.0));
    const auto profiles = head.profiles(2 * h + 2);
    const double below = sum_even_moment(profiles, h);
    const double above = sum_even_moment(profiles, h + 1);
    const double theta = (2.0 * h + 2.0 - p) / 2.0;
    out.lo = std::pow(below, 1.0 / (2.0 * h));
    out.hi = std::pow(std::pow(below, theta) * std::pow(above, 1.0 - theta), 1.0 / p);
    out.provenance = "interpolated";
    return out;
}

/// Bounds for symmetric variables with log-concave tails, p >= 2:
/// [0] deviation radius p max_k ||X_k||_2;
/// [1] sandwich between max{g, ||sum_{k<p} X_k||_p} and g + ||sum_{k<p} X_k||_p
///     with g = gamma_p (sum_{k >= ceil(p/2)} v_k)^{1/2}.
inline std::vector<BoundReport> latala_logconcave_bounds(const SequenceSpec& seq, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("log-concave bounds need p >= 2");
    auto radius = detail::base_report("logconcave_radius", seq, p);
    auto sandwich = detail::base_report("logconcave_sandwich", seq, p);
    const bool lc = seq.all_log_concave();
    const bool sym = seq.all_symmetric();
    for (auto* rep : {&radius, &sandwich}) {
        rep->assumptions.push_back({"log-concave tails", lc, ""});
        rep->assumptions.push_back({"symmetric variables", sym, ""});
    }
    if (!lc || !sym) return {detail::finalize(radius), detail::finalize(sandwich)};

    radius.radius = p * std::sqrt(seq.max_variance());
    radius.lower = radius.center - *radius.radius;
    radius.upper = radius.center + *radius.radius;

    const auto from = static_cast<std::size_t>(std::ceil(p / 2.0));
    const double g = gaussian_lp_norm(p) * std::sqrt(seq.variance_from(from));
    const auto head_count = static_cast<std::size_t>(std::ceil(p)) - 1;
    const auto head = head_norm(seq.prefix(head_count), p);
    sandwich.constants["head_count"] = static_cast<double>(std::min(head_count, seq.size()));
    sandwich.constants["tail_start"] = static_cast<double>(from);
    sandwich.auxiliary["gaussian_part"] = g;
    sandwich.auxiliary["head_norm"] = 0.5 * (head.lo + head.hi);
    sandwich.lower = std::max(g, head.lo);
    sandwich.upper = g + head.hi;
    sandwich.provenance = head.provenance;
    sandwich.bound_error = head.hi - head.lo;
    return {detail::finalize(radius), detail::finalize(sandwich)};
}

}  // namespace momcert
