#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "hdks/errors.hpp"

namespace hdks {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082,
                                              0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975,
                                              0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    const double fc = f(c);
    double k = kWk[7] * fc;
    double g = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = hw * kXk[i];
        const double s = f(c - dx) + f(c + dx);
        k += kWk[i] * s;
        if (i % 2 == 1) g += kWg[i / 2] * s;
    }
    return {a, b, k * hw, std::abs((k - g) * hw)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7, 15): bisect the panel with the largest
// error estimate until the summed estimate is below abs_tol.
template <class F>
QuadResult integrate_gk(const F& f, double a, double b, double abs_tol = 1e-11, int max_intervals = 20000) {
    if (a == b) return {};
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Panel> heap;
    heap.push(detail::gk15(f, a, b));
    double total = heap.top().value, err = heap.top().error;
    int count = 1;
    while (err > abs_tol) {
        if (count >= max_intervals) throw ToleranceNotMet("integrate_gk: refinement budget exhausted");
        const detail::Panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        const detail::Panel l = detail::gk15(f, p.a, m), r = detail::gk15(f, m, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
        ++count;
        // Re-sum periodically to keep the running totals free of drift.
        if (count % 64 == 0) {
            auto copy = heap;
            total = 0.0;
            err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    return {sign * total, err, count};
}

}  // namespace hdks
