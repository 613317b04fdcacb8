#pragma once

// Characteristic-function inequalities and the integral representation
//   E|X|^p = C_p * int_0^inf (phi(t) - 1 + t^2 E X^2 / 2) t^{-p-1} dt,  2 < p < 4,
// used as an engine for fractional absolute moments of sums.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "momcert/common.hpp"
#include "momcert/distmodel.hpp"
#include "momcert/exactmoments.hpp"
#include "momcert/quadrature.hpp"

namespace momcert {

/// Highest moment order carried along with a characteristic function.
inline constexpr int kCharFunctionMomentOrder = 24;

/// A real, even characteristic function with the variance and the even
/// moments of the underlying variable.
class CharFunction {
public:
    CharFunction(std::function<double(double)> phi, MomentProfile profile)
        : phi_(std::move(phi)), profile_(std::move(profile)) {
        if (!profile_.symmetric())
            throw std::invalid_argument("characteristic functions here must be real (symmetric law)");
    }

    static CharFunction of(const VariableSpec& spec) {
        if (spec.is_raw()) throw Refusal("no characteristic function available for a raw moment profile");
        return CharFunction([spec](double t) { return charfn_of(spec, t); },
                            moments_of(spec, kCharFunctionMomentOrder));
    }

    /// Characteristic function of the sum of independent summands.
    static CharFunction product(std::span<const CharFunction> parts) {
        if (parts.empty()) throw std::invalid_argument("empty product of characteristic functions");
        int order = kCharFunctionMomentOrder;
        for (const auto& p : parts) order = std::min(order, p.profile_.max_order());
        std::vector<MomentProfile> profiles;
        std::vector<std::function<double(double)>> phis;
        for (const auto& p : parts) {
            profiles.push_back(p.profile_.truncated(order));
            phis.push_back(p.phi_);
        }
        auto m = detail::convolve_moments(profiles, order);
        for (int l = 1; l <= order; l += 2) m[l] = 0.0;
        return CharFunction(
            [phis = std::move(phis)](double t) {
                double v = 1.0;
                for (const auto& f : phis) v *= f(t);
                return v;
            },
            MomentProfile(std::move(m), true, true));
    }

    static CharFunction of_sum(std::span<const VariableSpec> specs) {
        std::vector<CharFunction> parts;
        parts.reserve(specs.size());
        for (const auto& s : specs) parts.push_back(of(s));
        return product(parts);
    }

    double operator()(double t) const { return phi_(t); }
    double variance() const { return profile_.variance(); }
    const MomentProfile& profile() const { return profile_; }

    /// phi(t) - 1 + t^2 var / 2 without cancellation for small t.
    double compensated(double t) const {
        const double x = t * t;
        if (x * variance() < 1e-6) {
            double acc = 0.0, power = x * x, sign = 1.0;
            for (int l = 4; l <= std::min(profile_.max_order(), 8); l += 2) {
                acc += sign * profile_[l] * power / factorial(l);
                power *= x;
                sign = -sign;
            }
            return acc;
        }
        return phi_(t) - 1.0 + 0.5 * x * variance();
    }

private:
    std::function<double(double)> phi_;
    MomentProfile profile_;
};

struct IntegralResult {
    double value = 0.0;
    double quad_error = 0.0;  ///< adaptive-rule estimate plus series truncation
    double tail_error = 0.0;  ///< analytic bound on the dropped phi tail
    std::size_t evaluations = 0;
    bool converged = true;

    double total_error() const { return quad_error + tail_error; }
};

/// -(2/pi) sin(p pi / 2) Gamma(p + 1), positive on (2, 4).
inline double haagerup_constant(double p) {
    if (!(p > 2.0 && p < 4.0)) throw std::invalid_argument("haagerup_constant needs 2 < p < 4");
    return -2.0 / std::numbers::pi * std::sin(0.5 * p * std::numbers::pi) * std::tgamma(p + 1.0);
}

inline constexpr double kMaxBodySegments = 200000;

struct HaagerupOptions {
    std::size_t max_evaluations = 4'000'000;
};

/// E|X|^p from the characteristic function of X, 2 <= p <= 4.
/// p = 2 and p = 4 come straight from the moment profile.
inline IntegralResult haagerup_moment(const CharFunction& phi, double p, double tol,
                                      const HaagerupOptions& opts = {}) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (p == 2.0) return {phi.variance(), 0.0, 0.0, 0, true};
    if (p == 4.0) return {phi.profile()[4], 0.0, 0.0, 0, true};
    if (!(p > 2.0 && p < 4.0)) throw std::invalid_argument("haagerup_moment needs 2 <= p <= 4");

    const double cp = haagerup_constant(p);
    const double var = phi.variance();
    const auto& prof = phi.profile();
    const int top = prof.max_order() - prof.max_order() % 2;

    // Head [0, a]: integrate the power series of phi term by term.
    // a is small against the largest moment scale, so terms fall at least
    // like 0.04^j.
    const double scale = std::max(std::sqrt(var), std::pow(prof[top], 1.0 / top));
    const double a = 0.2 / scale;
    double head = 0.0, last_term = 0.0;
    for (int l = 4; l <= top; l += 2) {
        const double sign = (l / 2) % 2 == 0 ? 1.0 : -1.0;
        last_term = sign * prof[l] / factorial(l) * std::pow(a, l - p) / (l - p);
        head += last_term;
    }
    const double head_error = std::abs(last_term);

    // Tail [T, inf): closed forms for the polynomial pieces, |phi| <= 1 for the rest.
    double T = std::max(50.0 / std::sqrt(var), 10.0);
    T = std::max(T, 2.0 * a);
    while (cp * std::pow(T, -p) / p >= 0.5 * tol) T *= 2.0;
    // Body [a, T]: log-spaced breakpoints near the origin, then segments no
    // wider than one oscillation of the fastest component.
    const double width = 2.0 / scale;
    // Past this many segments the tolerance is out of reach; stop there and
    // let the reported tail error say so.
    T = std::min(T, 4.0 / scale + width * kMaxBodySegments);
    const double tail_closed = -std::pow(T, -p) / p + var * std::pow(T, 2.0 - p) / (2.0 * (p - 2.0));
    const double tail_bound = std::pow(T, -p) / p;

    std::vector<double> breaks;
    const double knee = std::min(T, 4.0 / scale);
    const int log_pieces = 32;
    for (int i = 0; i <= log_pieces; ++i) breaks.push_back(a * std::pow(knee / a, double(i) / log_pieces));
    for (double t = knee + width; t < T; t += width) breaks.push_back(t);
    if (breaks.back() < T) breaks.push_back(T);

    const auto integrand = [&](double t) { return phi.compensated(t) * std::pow(t, -p - 1.0); };
    const double body_budget = std::max(0.5 * tol / cp - head_error, 0.25 * tol / cp);
    const auto body = quad::integrate(integrand, breaks, body_budget, opts.max_evaluations);

    IntegralResult out;
    out.value = cp * (head + body.value + tail_closed);
    out.quad_error = cp * (body.error + head_error);
    out.tail_error = cp * tail_bound;
    out.evaluations = body.evaluations;
    out.converged = out.total_error() <= tol;
    return out;
}

/// E|X_1 + ... + X_n|^p for independent symmetric family variables.
inline IntegralResult sum_abs_moment_via_haagerup(std::span<const VariableSpec> specs, double p, double tol,
                                                  const HaagerupOptions& opts = {}) {
    for (const auto& s : specs)
        if (!s.symmetric() || s.is_raw())
            throw std::invalid_argument("Haagerup engine needs symmetric family variables");
    return haagerup_moment(CharFunction::of_sum(specs), p, tol, opts);
}

/// Default checker grid: 10^4 points on [0, 50] and 10^3 log-spaced
/// points on [1e-4, 1].
inline std::vector<double> default_t_grid() {
    std::vector<double> grid;
    grid.reserve(11000);
    for (int i = 0; i < 10000; ++i) grid.push_back(50.0 * i / 9999.0);
    for (int i = 0; i < 1000; ++i) grid.push_back(std::pow(10.0, -4.0 + 4.0 * i / 999.0));
    return grid;
}

struct CosineBoundsReport {
    double max_lower_slack = 0.0;  ///< max over t of phi - (1 - t^2 mu2 / 2)
    double max_upper_slack = 0.0;  ///< max over t of (1 - t^2 mu2 / 2 + t^4 mu4 / 24) - phi
    double min_lower_slack = 0.0;
    double min_upper_slack = 0.0;
    std::vector<double> violations;  ///< offending t values

    bool ok() const { return violations.empty(); }
};

/// 1 - t^2 E X^2 / 2 <= phi(t) <= 1 - t^2 E X^2 / 2 + t^4 E X^4 / 24 on the grid.
inline CosineBoundsReport check_cosine_bounds(const VariableSpec& spec, std::span<const double> t_grid) {
    if (!spec.symmetric() || spec.is_raw())
        throw std::invalid_argument("cosine bounds need a symmetric family variable");
    const auto prof = moments_of(spec, 4);
    CosineBoundsReport rep;
    bool first = true;
    for (double t : t_grid) {
        const double phi = charfn_of(spec, t);
        const double quad = 0.5 * t * t * prof[2];
        const double quart = t * t * t * t * prof[4] / 24.0;
        const double lo = phi - (1.0 - quad);
        const double hi = (1.0 - quad + quart) - phi;
        if (first) {
            rep.max_lower_slack = rep.min_lower_slack = lo;
            rep.max_upper_slack = rep.min_upper_slack = hi;
            first = false;
        }
        rep.max_lower_slack = std::max(rep.max_lower_slack, lo);
        rep.min_lower_slack = std::min(rep.min_lower_slack, lo);
        rep.max_upper_slack = std::max(rep.max_upper_slack, hi);
        rep.min_upper_slack = std::min(rep.min_upper_slack, hi);
        const double noise = 1e-12 * (1.0 + quad + quart);
        if (lo < -noise || hi < -noise) rep.violations.push_back(t);
    }
    return rep;
}

struct Condition {
    std::string name;
    bool satisfied;
    std::string detail;
};

struct CharfnInequalityReport {
    std::vector<Condition> preconditions;
    bool preconditions_hold = false;
    double min_slack = 0.0;  ///< min over t of phi_S + t^2/2 sum_{k<=m} v_k - phi_R
    std::vector<double> violations;

    bool ok() const { return preconditions_hold && violations.empty(); }
};

/// phi_S(t) + (t^2/2) sum_{k<=m} E X_k^2 >= phi_R(t), where S sums all X_k
/// and R sums Y_k for k > m. m is 1-based.
inline CharfnInequalityReport check_main_charfn_inequality(std::span<const VariableSpec> xs,
                                                           std::span<const VariableSpec> ys, std::size_t m,
                                                           std::span<const double> t_grid) {
    CharfnInequalityReport rep;
    const std::size_t n = xs.size();
    auto& pre = rep.preconditions;
    pre.push_back({"same length", ys.size() == n, std::to_string(n) + " vs " + std::to_string(ys.size())});
    pre.push_back({"1 <= m < n", m >= 1 && m < n, "m = " + std::to_string(m)});
    bool sym = true;
    for (const auto& s : xs) sym = sym && s.symmetric() && !s.is_raw();
    for (const auto& s : ys) sym = sym && s.symmetric() && !s.is_raw();
    pre.push_back({"symmetric family variables", sym, ""});
    if (ys.size() != n || !(m >= 1 && m < n) || !sym) return rep;

    bool same_var = true;
    double vmax = 0.0, head = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double vx = xs[k].variance(), vy = ys[k].variance();
        same_var = same_var && std::abs(vx - vy) <= 1e-12 * std::max(vx, vy);
        vmax = std::max(vmax, vx);
        if (k < m) head += vx;
    }
    pre.push_back({"E X_k^2 = E Y_k^2", same_var, ""});
    bool attains = false;
    for (std::size_t k = 0; k < m; ++k) attains = attains || xs[k].variance() >= vmax * (1.0 - 1e-12);
    pre.push_back({"max variance attained within the first m", attains, ""});
    double need = 0.0;
    for (std::size_t k = m; k < n; ++k) {
        const auto prof = moments_of(ys[k], 4);
        need = std::max(need, prof[4] / prof[2] / 6.0);
    }
    pre.push_back({"head variance >= max E Y^4 / (6 E Y^2)", head >= need * (1.0 - 1e-12),
                   std::to_string(head) + " vs " + std::to_string(need)});
    rep.preconditions_hold = std::all_of(pre.begin(), pre.end(), [](const Condition& c) { return c.satisfied; });
    if (!rep.preconditions_hold) return rep;

    bool first = true;
    for (double t : t_grid) {
        double phi_s = 1.0, phi_r = 1.0;
        for (std::size_t k = 0; k < n; ++k) phi_s *= charfn_of(xs[k], t);
        for (std::size_t k = m; k < n; ++k) phi_r *= charfn_of(ys[k], t);
        const double quad = 0.5 * t * t * head;
        const double slack = phi_s + quad - phi_r;
        rep.min_slack = first ? slack : std::min(rep.min_slack, slack);
        first = false;
        if (slack < -1e-12 * (1.0 + quad)) rep.violations.push_back(t);
    }
    return rep;
}

}  // namespace momcert
