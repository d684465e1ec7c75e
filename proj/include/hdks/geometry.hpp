#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "hdks/chart.hpp"
#include "hdks/errors.hpp"
#include "hdks/linalg.hpp"
#include "hdks/models.hpp"

namespace hdks {

enum class Scheme { closed_form, finite_difference };

inline std::string point_str(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
}

inline void require_domain(const ChartSpec& chart, const Point& p) {
    if (p.size() != chart.dim) throw DomainError(chart.id + ": wrong coordinate count");
    if (!chart.domain(p)) throw DomainError(chart.id + ": point " + point_str(p) + " outside chart domain");
}

inline Matrix metric_eval(const ChartSpec& chart, const Point& p) {
    require_domain(chart, p);
    return chart.metric(p);
}

namespace detail {

// Metric at a stencil point, with the domain and degeneracy checks the
// differencing schemes need.
inline Matrix stencil_metric(const ChartSpec& chart, const Point& q) {
    if (!chart.domain(q))
        throw DomainError(chart.id + ": finite-difference stencil leaves the domain at " + point_str(q));
    Matrix g = chart.metric(q);
    if (std::abs(determinant(g)) < 1e-12)
        throw SingularMetric(chart.id + ": |det g| < 1e-12 at " + point_str(q));
    return g;
}

inline MetricGradient fd_metric_gradient(const ChartSpec& chart, const Point& p, double rel) {
    MetricGradient dg(chart.dim);
    auto fn = [&](const Point& q) { return stencil_metric(chart, q); };
    for (std::size_t k = 0; k < chart.dim; ++k) dg.dg[k] = central_diff4(fn, p, k, fd_step(p[k], rel));
    return dg;
}

inline Christoffel christoffel_fd_rel(const ChartSpec& chart, const Point& p, double rel) {
    const Matrix g = stencil_metric(chart, p);
    return christoffel_from_gradient(g, fd_metric_gradient(chart, p, rel));
}

inline Christoffel christoffel_closed_unchecked(const ChartSpec& chart, const Point& p) {
    if (chart.christoffel_closed) return chart.christoffel_closed(p);
    if (chart.metric_gradient) return christoffel_from_gradient(chart.metric(p), chart.metric_gradient(p));
    throw NoClosedForm(chart.id + ": no closed-form Christoffel symbols");
}

}  // namespace detail

// Connection coefficients Gamma^k_ij. The finite-difference scheme uses
// fourth-order central differences of the metric components.
inline Christoffel christoffel(const ChartSpec& chart, const Point& p, Scheme scheme) {
    require_domain(chart, p);
    if (scheme == Scheme::closed_form) return detail::christoffel_closed_unchecked(chart, p);
    return detail::christoffel_fd_rel(chart, p, 1e-4);
}

inline Scheme preferred_scheme(const ChartSpec& chart) {
    return chart.has_closed_form() ? Scheme::closed_form : Scheme::finite_difference;
}

// Riemann tensor R^a_bcd stored as r[a][b][c][d].
struct Riemann {
    std::size_t dim = 0;
    std::array<std::array<Matrix, kMaxDim>, kMaxDim> r{};

    explicit Riemann(std::size_t n = 0) : dim(n) {
        for (auto& row : r)
            for (auto& m : row) m = Matrix(n);
    }
    double operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return r[a][b](c, d); }
    double& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) { return r[a][b](c, d); }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b) m = std::max(m, r[a][b].max_abs());
        return m;
    }
};

// R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb.
// With closed-form symbols, d Gamma is a single fourth-order difference;
// otherwise Gamma is itself differenced and the outer derivative takes one
// Richardson step between h and 2h.
inline Riemann riemann(const ChartSpec& chart, const Point& p, Scheme scheme) {
    require_domain(chart, p);
    const std::size_t n = chart.dim;
    std::array<Christoffel, kMaxDim> dgam;
    Christoffel gam(n);
    if (scheme == Scheme::closed_form) {
        gam = detail::christoffel_closed_unchecked(chart, p);
        auto fn = [&](const Point& q) {
            if (!chart.domain(q))
                throw DomainError(chart.id + ": stencil leaves the domain at " + point_str(q));
            return detail::christoffel_closed_unchecked(chart, q);
        };
        for (std::size_t c = 0; c < n; ++c) dgam[c] = central_diff4(fn, p, c, fd_step(p[c]));
    } else {
        gam = detail::christoffel_fd_rel(chart, p, 1e-4);
        auto fn = [&](const Point& q) { return detail::christoffel_fd_rel(chart, q, 1e-4); };
        for (std::size_t c = 0; c < n; ++c) {
            const double h = fd_step(p[c]);
            Christoffel fine = central_diff4(fn, p, c, h);
            Christoffel coarse = central_diff4(fn, p, c, 2.0 * h);
            // error ~ h^4: (16 D(h) - D(2h)) / 15
            fine *= 16.0;
            fine -= coarse;
            fine *= 1.0 / 15.0;
            dgam[c] = fine;
        }
    }
    Riemann R(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t d = 0; d < n; ++d) {
                    double v = dgam[c](a, d, b) - dgam[d](a, c, b);
                    for (std::size_t e = 0; e < n; ++e) v += gam(a, c, e) * gam(e, d, b) - gam(a, d, e) * gam(e, c, b);
                    R(a, b, c, d) = v;
                }
    return R;
}

struct RicciResult {
    Matrix ricci;
    double residual = 0.0;
};

// Ricci R_bd = R^a_bad and its largest coordinate component.
inline RicciResult ricci_and_residual(const ChartSpec& chart, const Point& p, Scheme scheme) {
    const Riemann R = riemann(chart, p, scheme);
    const std::size_t n = chart.dim;
    RicciResult out{Matrix(n), 0.0};
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t d = 0; d < n; ++d) {
            double s = 0.0;
            for (std::size_t a = 0; a < n; ++a) s += R(a, b, a, d);
            out.ricci(b, d) = s;
        }
    out.residual = out.ricci.max_abs();
    return out;
}

inline RicciResult ricci_and_residual(const ChartSpec& chart, const Point& p) {
    return ricci_and_residual(chart, p, preferred_scheme(chart));
}

// Largest component of the full Riemann tensor (flatness test).
inline double riemann_residual(const ChartSpec& chart, const Point& p) {
    return riemann(chart, p, preferred_scheme(chart)).max_abs();
}

// Gaussian curvature K of the static plane -f dt^2 + g dh^2:
// K = -1/(2 sqrt(fg)) [f'/sqrt(fg)]'.
inline double static_plane_curvature(const StaticModel& m, double h) {
    const double f = m.f(h), df = m.df(h), d2f = m.d2f(h);
    const double g = m.g(h), dg = m.dg(h);
    const double P = f * g;
    const double dP = df * g + f * dg;
    return -d2f / (2.0 * P) + df * dP / (4.0 * P * P);
}

struct WarpedResiduals {
    double rho1 = 0.0;
    double rho2 = 0.0;
    double rho3 = 0.0;
    double max() const { return std::max({rho1, rho2, rho3}); }
};

// Vacuum conditions for the warped product of the static plane with S^2,
// evaluated from closed-form derivatives only.
inline WarpedResiduals warped_vacuum_residual(const StaticModel& m, double h) {
    m.require(h);
    const double f = m.f(h), df = m.df(h);
    const double g = m.g(h), dg = m.dg(h);
    const double a = m.alpha(h), da = m.dalpha(h), d2a = m.d2alpha(h);
    const double K = static_plane_curvature(m, h);
    WarpedResiduals r;
    r.rho1 = std::abs(K - da * df / (a * f * g));
    r.rho2 = std::abs(K - (2.0 / (a * g)) * (d2a - dg * da / (2.0 * g)));
    const double hess = (1.0 / a) * (d2a / g + da / (2.0 * g) * (df / f - dg / g) + da * da / (g * a));
    r.rho3 = std::abs(hess - 1.0 / (a * a));
    return r;
}

// Numeric route for any 2-D chart, used to cross-check the closed forms.
inline double sectional_curvature_numeric(const ChartSpec& chart, const Point& p) {
    require_domain(chart, p);
    const Riemann R = riemann(chart, p, preferred_scheme(chart));
    const Matrix g = chart.metric(p);
    double r0101 = 0.0;
    for (std::size_t e = 0; e < 2; ++e) r0101 += g(0, e) * R(e, 1, 0, 1);
    return r0101 / determinant(g);
}

// Gaussian curvature of a 2-D chart: the chart's closed form when it has one,
// otherwise R_0101 / det g from the numeric Riemann tensor.
inline double sectional_curvature_plane(const ChartSpec& chart, const Point& p) {
    if (chart.dim != 2) throw DomainError(chart.id + ": sectional_curvature_plane needs a 2-D chart");
    require_domain(chart, p);
    if (chart.sectional_closed) return chart.sectional_closed(p);
    return sectional_curvature_numeric(chart, p);
}

enum class CausalKind { timelike, null, spacelike };

inline const char* to_string(CausalKind k) {
    switch (k) {
        case CausalKind::timelike: return "timelike";
        case CausalKind::null: return "null";
        case CausalKind::spacelike: return "spacelike";
    }
    return "?";
}

struct CausalClass {
    CausalKind kind = CausalKind::spacelike;
    std::optional<bool> future_pointing;
};

// Null band: |g(x,x)| <= 1e-10 * max|g_ij| * max|x^i|^2.
inline double null_band(const Matrix& g, const Tangent& x) {
    const double s = x.max_abs();
    return 1e-10 * g.max_abs() * s * s;
}

inline CausalKind causal_kind(const Matrix& g, const Tangent& x) {
    const double q = g.quadratic(x, x);
    if (std::abs(q) <= null_band(g, x)) return CausalKind::null;
    return q < 0.0 ? CausalKind::timelike : CausalKind::spacelike;
}

// Kind of x at p; with a timelike reference, also whether a causal x lies in
// the reference's cone.
inline CausalClass causal_class(const ChartSpec& chart, const Point& p, const Tangent& x,
                                const std::optional<Tangent>& reference = std::nullopt) {
    const Matrix g = metric_eval(chart, p);
    CausalClass c;
    c.kind = causal_kind(g, x);
    if (reference) {
        if (causal_kind(g, *reference) != CausalKind::timelike)
            throw NotCausal(chart.id + ": reference vector is not timelike");
        if (c.kind != CausalKind::spacelike) c.future_pointing = g.quadratic(*reference, x) < 0.0;
    }
    return c;
}

// Future-pointing test; a spacelike x has no time orientation.
inline bool future_pointing(const ChartSpec& chart, const Point& p, const Tangent& x, const Tangent& reference) {
    const CausalClass c = causal_class(chart, p, x, reference);
    if (!c.future_pointing) throw NotCausal(chart.id + ": spacelike vector has no time orientation");
    return *c.future_pointing;
}

}  // namespace hdks
