#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cellmob {

// Tolerances and truncation bounds shared by all semi-infinite integrals.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double r_max_factor = 8.0;  // radial truncation at r_max_factor / sqrt(lambda)
    int max_subdivisions = 400;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // achieved error estimate (plus any truncation budget the caller adds)
    bool converged = false;
    int subdivisions = 0;
};

namespace quad_detail {

// Gauss-Kronrod 7-15 abscissae on [0,1] and weights.
inline constexpr double kx[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
inline constexpr double kw[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double gw[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};

template <class F>
void gk15(F&& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double k15 = kw[0] * f0;
    double g7 = gw[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kx[i];
        const double fi = f(c + dx) + f(c - dx);
        k15 += kw[i] * fi;
        if ((i & 1) == 0) g7 += gw[i / 2] * fi;
    }
    k15 *= h;
    g7 *= h;
    value = k15;
    const double diff = 200.0 * std::abs(k15 - g7);
    error = diff * std::sqrt(diff);
    if (error > std::abs(k15 - g7)) error = std::abs(k15 - g7);
    error = std::max(error, std::abs(k15) * 1e-15);
}

struct Segment {
    double a, b, value, error;
};

}  // namespace quad_detail

// Globally adaptive Gauss-Kronrod integration of f over [a,b].
// Optional breakpoints pre-split the interval (branch points of the
// integrand should be listed so the rule never straddles a kink).
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                     int max_subdivisions, std::span<const double> breakpoints = {}) {
    QuadResult out;
    if (!(b > a)) {
        out.converged = true;
        return out;
    }
    std::vector<double> knots;
    knots.push_back(a);
    for (double x : breakpoints)
        if (x > a && x < b) knots.push_back(x);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    std::vector<quad_detail::Segment> segs;
    segs.reserve(static_cast<std::size_t>(max_subdivisions) + knots.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        quad_detail::Segment s{knots[i], knots[i + 1], 0, 0};
        quad_detail::gk15(f, s.a, s.b, s.value, s.error);
        segs.push_back(s);
    }

    int splits = 0;
    for (;;) {
        double total = 0, err = 0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        const double target = std::max(abs_tol, rel_tol * std::abs(total));
        if (err <= target || splits >= max_subdivisions) {
            out.value = total;
            out.error = err;
            out.converged = err <= target;
            out.subdivisions = splits;
            return out;
        }
        quad_detail::Segment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) {  // interval exhausted to rounding
            segs[worst].error = 0;
            ++splits;
            continue;
        }
        quad_detail::Segment left{s.a, mid, 0, 0}, right{mid, s.b, 0, 0};
        quad_detail::gk15(f, left.a, left.b, left.value, left.error);
        quad_detail::gk15(f, right.a, right.b, right.value, right.error);
        segs[worst] = left;
        segs.push_back(right);
        ++splits;
    }
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec,
                     std::span<const double> breakpoints = {}) {
    return integrate(std::forward<F>(f), a, b, spec.abs_tol, spec.rel_tol,
                     spec.max_subdivisions, breakpoints);
}

}  // namespace cellmob
