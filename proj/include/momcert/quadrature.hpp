#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a finite interval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace momcert::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  ///< sum of |K15 - G7| over the final partition
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// Kronrod abscissae on [0, 1] (descending) and weights; every other node
// is a Gauss point.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * pair;
        if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over consecutive breakpoints, bisecting the segment with
/// the largest error estimate until the total estimate is below abs_tol or
/// max_evaluations is spent.
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, double abs_tol,
                 std::size_t max_evaluations = 4'000'000) {
    Result out;
    if (breakpoints.size() < 2) return out;
    std::priority_queue<detail::Segment> heap;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        auto seg = detail::gk15(f, breakpoints[i], breakpoints[i + 1]);
        out.evaluations += 15;
        total_error += seg.error;
        heap.push(seg);
    }
    while (total_error > abs_tol && out.evaluations + 30 <= max_evaluations && !heap.empty()) {
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // segment can no longer be split
        heap.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        out.evaluations += 30;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the partition to avoid drift in the running totals.
    std::vector<double> values, errors;
    while (!heap.empty()) {
        values.push_back(heap.top().value);
        errors.push_back(heap.top().error);
        heap.pop();
    }
    std::sort(values.begin(), values.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    std::sort(errors.begin(), errors.end());
    for (double v : values) out.value += v;
    for (double e : errors) out.error += e;
    out.converged = out.error <= abs_tol;
    return out;
}

}  // namespace momcert::quad
