#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace hdks {

// Flat state vector for first-order systems of up to 12 unknowns.
struct OdeState {
    std::array<double, 12> y{};
    std::size_t n = 0;
};

struct Dp45Result {
    OdeState y5;     // fifth-order solution
    double err = 0;  // scaled RMS error estimate (accept when <= 1)
};

// One Dormand-Prince 5(4) step. rhs(y, dy) fills dy; it may throw to signal
// that a stage left the admissible region.
template <class Rhs>
Dp45Result dp45_step(const Rhs& rhs, const OdeState& y0, double h, double rtol, double atol) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    const std::size_t n = y0.n;
    OdeState k1, k2, k3, k4, k5, k6, k7, t;
    k1.n = k2.n = k3.n = k4.n = k5.n = k6.n = k7.n = t.n = n;
    rhs(y0, k1);
    for (std::size_t i = 0; i < n; ++i) t.y[i] = y0.y[i] + h * a21 * k1.y[i];
    rhs(t, k2);
    for (std::size_t i = 0; i < n; ++i) t.y[i] = y0.y[i] + h * (a31 * k1.y[i] + a32 * k2.y[i]);
    rhs(t, k3);
    for (std::size_t i = 0; i < n; ++i) t.y[i] = y0.y[i] + h * (a41 * k1.y[i] + a42 * k2.y[i] + a43 * k3.y[i]);
    rhs(t, k4);
    for (std::size_t i = 0; i < n; ++i)
        t.y[i] = y0.y[i] + h * (a51 * k1.y[i] + a52 * k2.y[i] + a53 * k3.y[i] + a54 * k4.y[i]);
    rhs(t, k5);
    for (std::size_t i = 0; i < n; ++i)
        t.y[i] = y0.y[i] + h * (a61 * k1.y[i] + a62 * k2.y[i] + a63 * k3.y[i] + a64 * k4.y[i] + a65 * k5.y[i]);
    rhs(t, k6);
    Dp45Result out;
    out.y5.n = n;
    for (std::size_t i = 0; i < n; ++i)
        out.y5.y[i] = y0.y[i] + h * (b1 * k1.y[i] + b3 * k3.y[i] + b4 * k4.y[i] + b5 * k5.y[i] + b6 * k6.y[i]);
    rhs(out.y5, k7);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e =
            h * (e1 * k1.y[i] + e3 * k3.y[i] + e4 * k4.y[i] + e5 * k5.y[i] + e6 * k6.y[i] + e7 * k7.y[i]);
        const double sc = atol + rtol * std::max(std::abs(y0.y[i]), std::abs(out.y5.y[i]));
        acc += (e / sc) * (e / sc);
    }
    out.err = std::sqrt(acc / static_cast<double>(n));
    return out;
}

// Standard step-size update with safety factor and growth limits.
inline double dp45_next_step(double h, double err) {
    constexpr double safety = 0.9, min_fac = 0.2, max_fac = 5.0;
    if (err == 0.0) return h * max_fac;
    return h * std::clamp(safety * std::pow(err, -0.2), min_fac, max_fac);
}

}  // namespace hdks
