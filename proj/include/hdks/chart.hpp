#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdks/errors.hpp"
#include "hdks/linalg.hpp"

namespace hdks {

// A named coordinate chart: domain predicate plus metric field, with optional
// closed-form derivative data and the bookkeeping the geodesic and topology
// layers need (connected-component labels, distance to the domain boundary,
// a future-pointing reference field, a Killing field).
struct ChartSpec {
    std::string id;
    std::size_t dim = 0;
    double mass = 1.0;
    std::vector<std::string> coord_names;

    std::function<bool(const Point&)> domain;
    std::function<Matrix(const Point&)> metric;

    // Closed-form dg[k](i,j) = d_k g_ij. When present the closed-form
    // Christoffel scheme is available.
    std::function<MetricGradient(const Point&)> metric_gradient;
    // Optional direct Christoffel formula; overrides the metric-gradient route.
    std::function<Christoffel(const Point&)> christoffel_closed;

    // Label of the connected piece of the domain containing p.
    std::function<int(const Point&)> component;
    // Non-negative, dimensionless distance to the edge of the domain.
    std::function<double(const Point&)> boundary_distance;
    // Future-pointing timelike reference vector (time orientation).
    std::function<Tangent(const Point&)> time_reference;
    // Static Killing vector field whose energy E = -g(K, x) is conserved.
    std::function<std::optional<Tangent>(const Point&)> killing_field;
    std::function<std::string(const Point&)> region_tag;
    // Areal radius r(p), used for curvature sentinels and reports.
    std::function<double(const Point&)> areal_radius;
    // Closed-form Gaussian curvature of the 2-D base plane through p (the
    // chart itself when dim == 2).
    std::function<double(const Point&)> sectional_closed;

    bool has_closed_form() const { return static_cast<bool>(metric_gradient) || static_cast<bool>(christoffel_closed); }

    std::optional<std::size_t> coord_index(const std::string& name) const {
        for (std::size_t i = 0; i < coord_names.size(); ++i)
            if (coord_names[i] == name) return i;
        return std::nullopt;
    }

    int component_of(const Point& p) const { return component ? component(p) : 0; }
};

// Per-coordinate finite-difference step.
inline double fd_step(double x, double rel = 1e-4) { return rel * std::max(1.0, std::abs(x)); }

// Fourth-order central difference of a scalar, matrix-valued or otherwise
// vector-space valued function along coordinate i.
template <class F>
auto central_diff4(const F& fn, const Point& p, std::size_t i, double h) {
    Point a = p, b = p, c = p, d = p;
    a[i] -= 2 * h;
    b[i] -= h;
    c[i] += h;
    d[i] += 2 * h;
    auto fa = fn(a);
    auto fb = fn(b);
    auto fc = fn(c);
    auto fd = fn(d);
    // (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h
    fa -= fd;
    fc -= fb;
    fc *= 8.0;
    fc += fa;
    fc *= 1.0 / (12.0 * h);
    return fc;
}

// Generic Levi-Civita formula from a metric and its gradient.
inline Christoffel christoffel_from_gradient(const Matrix& g, const MetricGradient& dg) {
    const std::size_t n = g.size();
    const auto [det, ginv] = det_and_inverse(g);
    (void)det;
    Christoffel out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            // lowered symbol [ij,m]
            std::array<double, kMaxDim> low{};
            for (std::size_t m = 0; m < n; ++m)
                low[m] = 0.5 * (dg.dg[j](i, m) + dg.dg[i](j, m) - dg.dg[m](i, j));
            for (std::size_t k = 0; k < n; ++k) {
                double s = 0.0;
                for (std::size_t m = 0; m < n; ++m) s += ginv(k, m) * low[m];
                out(k, i, j) = s;
                out(k, j, i) = s;
            }
        }
    }
    return out;
}

// Two-dimensional (or one-dimensional) base geometry used to assemble a
// warped product base x_alpha S^2 in coordinates (base..., theta, phi).
struct WarpedBase {
    std::size_t dim = 2;
    std::function<bool(const Point&)> domain;
    std::function<Matrix(const Point&)> metric;
    std::function<MetricGradient(const Point&)> metric_gradient;  // optional
    std::function<double(const Point&)> warp;
    std::function<Tangent(const Point&)> warp_gradient;  // optional
};

inline Point base_part(const Point& p, std::size_t b) {
    Point q(b);
    for (std::size_t i = 0; i < b; ++i) q[i] = p[i];
    return q;
}

inline ChartSpec make_warped_chart(std::string id, double mass, std::vector<std::string> base_names,
                                   WarpedBase base) {
    ChartSpec c;
    c.id = std::move(id);
    c.mass = mass;
    const std::size_t b = base.dim;
    c.dim = b + 2;
    c.coord_names = std::move(base_names);
    c.coord_names.push_back("theta");
    c.coord_names.push_back("phi");

    auto bdom = base.domain;
    c.domain = [bdom, b](const Point& p) {
        const double th = p[b];
        return th > 0.0 && th < M_PI && std::isfinite(p[b + 1]) && bdom(base_part(p, b));
    };
    auto bmet = base.metric;
    auto warp = base.warp;
    c.metric = [bmet, warp, b](const Point& p) {
        const Point q = base_part(p, b);
        const Matrix gb = bmet(q);
        Matrix g(b + 2);
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j) g(i, j) = gb(i, j);
        const double a = warp(q);
        const double s = std::sin(p[b]);
        g(b, b) = a * a;
        g(b + 1, b + 1) = a * a * s * s;
        return g;
    };
    c.areal_radius = [warp, b](const Point& p) { return warp(base_part(p, b)); };

    if (base.metric_gradient && base.warp_gradient) {
        auto bgrad = base.metric_gradient;
        auto wgrad = base.warp_gradient;
        c.metric_gradient = [bgrad, warp, wgrad, b](const Point& p) {
            const Point q = base_part(p, b);
            const MetricGradient gb = bgrad(q);
            const Tangent da = wgrad(q);
            const double a = warp(q);
            const double s = std::sin(p[b]);
            const double co = std::cos(p[b]);
            MetricGradient out(b + 2);
            for (std::size_t k = 0; k < b; ++k) {
                for (std::size_t i = 0; i < b; ++i)
                    for (std::size_t j = 0; j < b; ++j) out.dg[k](i, j) = gb.dg[k](i, j);
                out.dg[k](b, b) = 2.0 * a * da[k];
                out.dg[k](b + 1, b + 1) = 2.0 * a * da[k] * s * s;
            }
            out.dg[b](b + 1, b + 1) = 2.0 * a * a * s * co;
            return out;
        };
    }
    return c;
}

}  // namespace hdks
