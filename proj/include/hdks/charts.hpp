#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdks/chart.hpp"
#include "hdks/errors.hpp"
#include "hdks/geometry.hpp"
#include "hdks/ks_profile.hpp"
#include "hdks/linalg.hpp"
#include "hdks/models.hpp"

namespace hdks {

enum class Region { R_I_plus, R_I_minus, R_II_plus, R_II_minus, Horizon, BlackHole, Normal, Exterior };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::R_I_plus: return "R_I_plus";
        case Region::R_I_minus: return "R_I_minus";
        case Region::R_II_plus: return "R_II_plus";
        case Region::R_II_minus: return "R_II_minus";
        case Region::Horizon: return "Horizon";
        case Region::BlackHole: return "BlackHole";
        case Region::Normal: return "Normal";
        case Region::Exterior: return "Exterior";
    }
    return "?";
}

inline Region region_from_string(const std::string& s) {
    for (Region r : {Region::R_I_plus, Region::R_I_minus, Region::R_II_plus, Region::R_II_minus, Region::Horizon,
                     Region::BlackHole, Region::Normal, Region::Exterior})
        if (s == to_string(r)) return r;
    throw DomainError("unknown region tag: " + s);
}

// |uv| at or below this counts as the horizon.
inline double horizon_tolerance(double mu) { return 1e-12 * mu * M_E; }

inline Region classify_region(double mu, double u, double v) {
    const double w = u * v;
    if (!(w > -mu)) throw DomainError("classify_region: uv <= -mu lies beyond the singularity");
    if (std::abs(w) <= horizon_tolerance(mu)) return Region::Horizon;
    // f^-1(uv) > mu exactly when uv > 0
    if (w > 0.0) return u > 0.0 ? Region::R_II_plus : Region::R_II_minus;
    return u > 0.0 ? Region::R_I_plus : Region::R_I_minus;
}

// (t, r) -> (u, v) on one of the four Kruskal branches.
inline std::pair<double, double> hd_to_ks(double mu, Region region, double t, double r) {
    const bool outer = region == Region::R_II_plus || region == Region::R_II_minus;
    const bool inner = region == Region::R_I_plus || region == Region::R_I_minus;
    if (!outer && !inner) throw DomainError(std::string("hd_to_ks: no branch for region ") + to_string(region));
    if (!(r > 0.0) || r == mu) throw DomainError("hd_to_ks: r must be positive and different from mu");
    if (outer && !(r > mu)) throw DomainError("hd_to_ks: exterior branch needs r > mu");
    if (inner && !(r < mu)) throw DomainError("hd_to_ks: black hole branch needs r < mu");
    const double a = std::sqrt(std::abs(r - mu));
    double u = a * std::exp((r + t) / (2.0 * mu));
    double v = a * std::exp((r - t) / (2.0 * mu));
    switch (region) {
        case Region::R_II_plus: break;
        case Region::R_II_minus: u = -u; v = -v; break;
        case Region::R_I_plus: v = -v; break;
        case Region::R_I_minus: u = -u; break;
        default: break;
    }
    return {u, v};
}

struct HdCoords {
    Region region = Region::R_II_plus;
    double t = 0.0;
    double r = 0.0;
};

inline HdCoords ks_to_hd(double mu, double u, double v) {
    const Region reg = classify_region(mu, u, v);
    if (reg == Region::Horizon) throw HorizonPoint("ks_to_hd: uv = 0 has no HD coordinates");
    KsProfile prof(mu);
    return {reg, mu * std::log(std::abs(u / v)), prof.f_inv(u * v)};
}

// Unimodular radial coordinate h -> areal radius R = (3h + mu^3)^(1/3).
inline double unimodular_transition(double mu, double h) {
    if (!(h > 0.0)) throw DomainError("unimodular_transition: h must be positive");
    return std::cbrt(3.0 * h + mu * mu * mu);
}

inline double unimodular_inverse(double mu, double R) {
    if (!(R > mu)) throw DomainError("unimodular_inverse: R <= mu has no preimage");
    return (R * R * R - mu * mu * mu) / 3.0;
}

enum class Historical { painleve_gullstrand, eddington, lemaitre, kruskal_xy };

inline Historical historical_from_string(const std::string& s) {
    if (s == "painleve_gullstrand") return Historical::painleve_gullstrand;
    if (s == "eddington") return Historical::eddington;
    if (s == "lemaitre") return Historical::lemaitre;
    if (s == "kruskal_xy") return Historical::kruskal_xy;
    throw DomainError("unknown historical transform: " + s);
}

// HD (t, r) into a historical chart. PG and Eddington return (new time, r);
// Kruskal-xy returns (x, y).
inline std::pair<double, double> historical_transform(Historical kind, double mu, double t, double r) {
    if (!(r > 0.0) || r == mu) throw DomainError("historical_transform: r must be positive and different from mu");
    switch (kind) {
        case Historical::painleve_gullstrand:
            return {t + r + mu * std::log(std::abs(r / mu - 1.0)), r};
        case Historical::eddington:
            return {t - mu * std::log(std::abs(r - mu)), r};
        case Historical::kruskal_xy: {
            if (!(r > mu)) throw DomainError("kruskal_xy: only the exterior branch is implemented");
            const double a = std::sqrt(r / mu - 1.0) * std::exp(r / (2.0 * mu));
            return {a * std::cosh(t / (2.0 * mu)), a * std::sinh(t / (2.0 * mu))};
        }
        case Historical::lemaitre:
            throw NoClosedForm("lemaitre: no transition to HD coordinates is given; use the chart directly");
    }
    throw DomainError("historical_transform: bad kind");
}

inline std::pair<double, double> historical_inverse(Historical kind, double mu, double a, double b) {
    switch (kind) {
        case Historical::painleve_gullstrand: {
            const double r = b;
            if (!(r > 0.0) || r == mu) throw DomainError("painleve_gullstrand inverse: r = mu");
            return {a - r - mu * std::log(std::abs(r / mu - 1.0)), r};
        }
        case Historical::eddington: {
            const double r = b;
            if (!(r > 0.0) || r == mu) throw DomainError("eddington inverse: r = mu");
            return {a + mu * std::log(std::abs(r - mu)), r};
        }
        case Historical::kruskal_xy: {
            if (!(a > std::abs(b))) throw DomainError("kruskal_xy inverse: needs x > |y|");
            KsProfile prof(mu);
            return {2.0 * mu * std::atanh(b / a), prof.f_inv(mu * (a * a - b * b))};
        }
        case Historical::lemaitre:
            throw NoClosedForm("lemaitre: no transition to HD coordinates is given");
    }
    throw DomainError("historical_inverse: bad kind");
}

// Gaussian curvature of the Kruskal plane, S = -(2/F) d_v(F_u / F), written
// out through r(u, v) with r_u = v / f'(r), r_v = u / f'(r).
inline double ks_sectional(const KsProfile& prof, double u, double v) {
    const double r = prof.f_inv(u * v);
    const double F = prof.F(r);
    const double fp = prof.df(r);
    const double L = prof.dlogF(r);
    const double dL = 1.0 / (r * r);
    const double dv_term = L / fp + (u * v / fp) * (dL / fp - L * prof.d2f(r) / (fp * fp));
    return -(2.0 / F) * dv_term;
}

// The same expression without the leading minus sign.
inline double ks_sectional_unsigned(const KsProfile& prof, double u, double v) { return -ks_sectional(prof, u, v); }

namespace detail {

inline bool finite_all(const Point& p) {
    for (double x : p)
        if (!std::isfinite(x)) return false;
    return true;
}

inline Tangent tangent_of(std::size_t n, std::initializer_list<std::pair<std::size_t, double>> entries) {
    Tangent x(n);
    for (auto [i, v] : entries) x[i] = v;
    return x;
}

// Plane -f dt^2 + g dh^2 with warp alpha from a static model.
inline WarpedBase static_base(const StaticModel& m, std::function<bool(double)> h_ok) {
    WarpedBase b;
    b.dim = 2;
    b.domain = [h_ok](const Point& q) { return std::isfinite(q[0]) && std::isfinite(q[1]) && h_ok(q[1]); };
    b.metric = [m](const Point& q) { return Matrix::diagonal({-m.f(q[1]), m.g(q[1])}); };
    b.metric_gradient = [m](const Point& q) {
        MetricGradient d(2);
        d.dg[1](0, 0) = -m.df(q[1]);
        d.dg[1](1, 1) = m.dg(q[1]);
        return d;
    };
    b.warp = [m](const Point& q) { return m.alpha(q[1]); };
    b.warp_gradient = [m](const Point& q) { return Tangent{0.0, m.dalpha(q[1])}; };
    return b;
}

inline ChartSpec plane_of(const std::string& id, double mass, std::vector<std::string> names, const WarpedBase& b) {
    ChartSpec c;
    c.id = id;
    c.mass = mass;
    c.dim = 2;
    c.coord_names = std::move(names);
    c.domain = b.domain;
    c.metric = b.metric;
    c.metric_gradient = b.metric_gradient;
    c.areal_radius = b.warp;
    return c;
}

inline WarpedBase ks_base(double mu) {
    KsProfile prof(mu);
    WarpedBase b;
    b.dim = 2;
    b.domain = [mu](const Point& q) {
        return std::isfinite(q[0]) && std::isfinite(q[1]) && q[0] * q[1] > -mu;
    };
    b.metric = [prof](const Point& q) {
        const double F = prof.F(prof.f_inv(q[0] * q[1]));
        Matrix g(2);
        g(0, 1) = g(1, 0) = 0.5 * F;
        return g;
    };
    b.metric_gradient = [prof](const Point& q) {
        const double r = prof.f_inv(q[0] * q[1]);
        const double half_dF = 0.5 * prof.dF(r) / prof.df(r);
        MetricGradient d(2);
        d.dg[0](0, 1) = d.dg[0](1, 0) = half_dF * q[1];
        d.dg[1](0, 1) = d.dg[1](1, 0) = half_dF * q[0];
        return d;
    };
    b.warp = [prof](const Point& q) { return prof.f_inv(q[0] * q[1]); };
    b.warp_gradient = [prof](const Point& q) {
        const double fp = prof.df(prof.f_inv(q[0] * q[1]));
        return Tangent{q[1] / fp, q[0] / fp};
    };
    return b;
}

// (t, x) plane with metric [[a, c], [c, b]] depending on r = x only, used by
// the Painleve-Gullstrand and Eddington forms.
inline WarpedBase radial_plane(std::function<Matrix(double)> met, std::function<Matrix(double)> dmet, bool closed) {
    WarpedBase b;
    b.dim = 2;
    b.domain = [](const Point& q) { return std::isfinite(q[0]) && q[1] > 0.0 && std::isfinite(q[1]); };
    b.metric = [met](const Point& q) { return met(q[1]); };
    if (closed) {
        b.metric_gradient = [dmet](const Point& q) {
            MetricGradient d(2);
            d.dg[1] = dmet(q[1]);
            return d;
        };
        b.warp_gradient = [](const Point&) { return Tangent{0.0, 1.0}; };
    }
    b.warp = [](const Point& q) { return q[1]; };
    return b;
}

inline const char* hd_side(double mu, double r) { return r < mu ? "BlackHole" : (r > mu ? "Normal" : "Horizon"); }

}  // namespace detail

// ---- chart constructors -------------------------------------------------

inline ChartSpec make_hd_chart(double mu, bool plane = false) {
    const StaticModel m = hd_model(mu);
    auto h_ok = [mu](double r) { return r > 0.0 && r != mu; };
    const WarpedBase b = detail::static_base(m, h_ok);
    ChartSpec c = plane ? detail::plane_of("hd_plane", mu, {"t", "r"}, b)
                        : make_warped_chart("hd", mu, {"t", "r"}, b);
    const std::size_t n = c.dim;
    c.component = [mu](const Point& p) { return p[1] < mu ? 1 : 0; };
    c.boundary_distance = [mu](const Point& p) { return std::min(std::abs(p[1] - mu), p[1]) / mu; };
    c.time_reference = [mu, n](const Point& p) {
        const double r = p[1];
        if (r > mu) return detail::tangent_of(n, {{0, 1.0 / std::sqrt(1.0 - mu / r)}});
        // inside, the future is the direction of decreasing r
        return detail::tangent_of(n, {{1, -std::sqrt(mu / r - 1.0)}});
    };
    c.killing_field = [n](const Point&) { return std::optional<Tangent>(detail::tangent_of(n, {{0, 1.0}})); };
    c.region_tag = [mu](const Point& p) { return std::string(detail::hd_side(mu, p[1])); };
    c.sectional_closed = [m](const Point& p) { return static_plane_curvature(m, p[1]); };
    return c;
}

inline ChartSpec make_static_model_chart(const std::string& id, const StaticModel& m) {
    const WarpedBase b = detail::static_base(m, [m](double h) { return m.contains(h); });
    ChartSpec c = make_warped_chart(id, m.mass, {"t", "h"}, b);
    c.component = [](const Point&) { return 0; };
    const double lo = m.lo, mu = m.mass;
    c.boundary_distance = [lo, mu](const Point& p) { return (p[1] - lo) / mu; };
    c.time_reference = [m](const Point& p) { return Tangent{1.0 / std::sqrt(m.f(p[1])), 0.0, 0.0, 0.0}; };
    c.killing_field = [](const Point&) { return std::optional<Tangent>(Tangent{1.0, 0.0, 0.0, 0.0}); };
    c.region_tag = [](const Point&) { return std::string("Exterior"); };
    c.sectional_closed = [m](const Point& p) { return static_plane_curvature(m, p[1]); };
    return c;
}

inline ChartSpec make_ks_chart(double mu, bool plane = false) {
    const WarpedBase b = detail::ks_base(mu);
    ChartSpec c = plane ? detail::plane_of("ks_plane", mu, {"u", "v"}, b) : make_warped_chart("ks", mu, {"u", "v"}, b);
    const std::size_t n = c.dim;
    KsProfile prof(mu);
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [prof](const Point& p) { return prof.f_inv(p[0] * p[1]) / prof.mass(); };
    c.time_reference = [n](const Point&) { return detail::tangent_of(n, {{0, 1.0}, {1, -1.0}}); };
    c.killing_field = [mu, n](const Point& p) -> std::optional<Tangent> {
        if (std::abs(p[0] * p[1]) <= horizon_tolerance(mu)) return std::nullopt;
        return detail::tangent_of(n, {{0, p[0] / (2.0 * mu)}, {1, -p[1] / (2.0 * mu)}});
    };
    c.region_tag = [mu](const Point& p) { return std::string(to_string(classify_region(mu, p[0], p[1]))); };
    c.sectional_closed = [prof](const Point& p) { return ks_sectional(prof, p[0], p[1]); };
    return c;
}

// -(1 - mu/r) dz^2 + (dz dr + dr dz) + r^2 dOmega^2
inline ChartSpec make_painleve_gullstrand_chart(double mu) {
    auto met = [mu](double r) {
        Matrix g(2);
        g(0, 0) = -(1.0 - mu / r);
        g(0, 1) = g(1, 0) = 1.0;
        return g;
    };
    auto dmet = [mu](double r) {
        Matrix d(2);
        d(0, 0) = -mu / (r * r);
        return d;
    };
    ChartSpec c = make_warped_chart("painleve_gullstrand", mu, {"z", "r"}, detail::radial_plane(met, dmet, true));
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [mu](const Point& p) { return p[1] / mu; };
    c.time_reference = [mu](const Point& p) { return Tangent{1.0, -mu / p[1], 0.0, 0.0}; };
    c.killing_field = [](const Point&) { return std::optional<Tangent>(Tangent{1.0, 0.0, 0.0, 0.0}); };
    c.region_tag = [mu](const Point& p) { return std::string(detail::hd_side(mu, p[1])); };
    return c;
}

// -(1 - mu/r) dT^2 + s mu/r (dT dr + dr dT) + (1 + mu/r) dr^2 + r^2 dOmega^2.
// s = +1 is the printed form, s = -1 the one the time shift produces.
inline ChartSpec make_eddington_chart(double mu, bool printed) {
    const double s = printed ? 1.0 : -1.0;
    auto met = [mu, s](double r) {
        Matrix g(2);
        g(0, 0) = -(1.0 - mu / r);
        g(0, 1) = g(1, 0) = s * mu / r;
        g(1, 1) = 1.0 + mu / r;
        return g;
    };
    auto dmet = [mu, s](double r) {
        const double q = mu / (r * r);
        Matrix d(2);
        d(0, 0) = -q;
        d(0, 1) = d(1, 0) = -s * q;
        d(1, 1) = -q;
        return d;
    };
    ChartSpec c = make_warped_chart(printed ? "eddington_paper" : "eddington_derived", mu, {"T", "r"},
                                    detail::radial_plane(met, dmet, !printed));
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [mu](const Point& p) { return p[1] / mu; };
    c.time_reference = [mu, s](const Point& p) { return Tangent{1.0, -s * mu / (p[1] + mu), 0.0, 0.0}; };
    c.killing_field = [](const Point&) { return std::optional<Tangent>(Tangent{1.0, 0.0, 0.0, 0.0}); };
    c.region_tag = [mu](const Point& p) { return std::string(detail::hd_side(mu, p[1])); };
    return c;
}

// -dtau^2 + (mu/r) drho^2 + r^2 dOmega^2 with r = [c sqrt(mu) (rho - tau)]^(2/3).
inline ChartSpec make_lemaitre_chart(double mu, double c_const, const std::string& id) {
    auto radius = [mu, c_const](const Point& q) { return std::cbrt(std::pow(c_const * std::sqrt(mu) * (q[1] - q[0]), 2.0)); };
    WarpedBase b;
    b.dim = 2;
    b.domain = [](const Point& q) { return std::isfinite(q[0]) && std::isfinite(q[1]) && q[1] > q[0]; };
    b.metric = [mu, radius](const Point& q) { return Matrix::diagonal({-1.0, mu / radius(q)}); };
    b.warp = radius;
    ChartSpec c = make_warped_chart(id, mu, {"tau", "rho"}, b);
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [radius, mu](const Point& p) { return radius(p) / mu; };
    c.time_reference = [](const Point&) { return Tangent{1.0, 0.0, 0.0, 0.0}; };
    return c;
}

// Coefficient of -dx^2 + dy^2 in the (x, y) Kruskal form. The printed chart
// uses F with F^2 = (16 mu / r) exp(-r/mu); `squared` takes that F^2 as the
// coefficient; `derived` is the pullback of the KS plane through
// u = sqrt(mu)(x + y), v = sqrt(mu)(x - y), which reads F (dx^2 - dy^2).
enum class KruskalXyProfile { printed, squared, derived };

inline double kruskal_xy_coefficient(KruskalXyProfile k, double mu, double r) {
    const double e = std::exp(-r / mu);
    switch (k) {
        case KruskalXyProfile::printed: return std::sqrt(16.0 * mu / r * e);
        case KruskalXyProfile::squared: return 16.0 * mu / r * e;
        case KruskalXyProfile::derived: return 4.0 * mu * mu * mu / r * e;
    }
    return 0.0;
}

// Kruskal form -F dx^2 + F dy^2 with (r/mu - 1) exp(r/mu) = x^2 - y^2.
inline ChartSpec make_kruskal_xy_chart(double mu, KruskalXyProfile profile = KruskalXyProfile::printed) {
    KsProfile prof(mu);
    auto radius = [prof, mu](const Point& q) { return prof.f_inv(mu * (q[0] * q[0] - q[1] * q[1])); };
    WarpedBase b;
    b.dim = 2;
    b.domain = [](const Point& q) {
        return std::isfinite(q[0]) && std::isfinite(q[1]) && q[0] * q[0] - q[1] * q[1] > -1.0;
    };
    b.metric = [mu, radius, profile](const Point& q) {
        const double F = kruskal_xy_coefficient(profile, mu, radius(q));
        // x is the spacelike coordinate of the transform, so the derived form flips the signs
        if (profile == KruskalXyProfile::derived) return Matrix::diagonal({F, -F});
        return Matrix::diagonal({-F, F});
    };
    b.warp = radius;
    ChartSpec c = make_warped_chart("kruskal_xy", mu, {"x", "y"}, b);
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [radius, mu](const Point& p) { return radius(p) / mu; };
    c.time_reference = [](const Point&) { return Tangent{1.0, 0.0, 0.0, 0.0}; };
    return c;
}

struct ErComponents {
    double g_tt = 0.0;
    double g_uu = 0.0;
    double sphere = 0.0;  // coefficient of the unit-sphere metric
};

// Einstein-Rosen form under r = u^2 + mu. The printed variant replaces
// u^2 + mu by u^2 + mu^2 and multiplies the sphere by (u^2 + mu^2).
inline ErComponents er_bridge_components(double mu, double u, bool printed) {
    if (printed) {
        const double a = u * u + mu * mu;
        return {-u * u / a, 4.0 * a, a};
    }
    const double a = u * u + mu;
    return {-u * u / a, 4.0 * a, a * a};
}

inline ChartSpec make_er_chart(double mu, bool printed) {
    WarpedBase b;
    b.dim = 2;
    b.domain = [](const Point& q) { return std::isfinite(q[0]) && std::isfinite(q[1]) && q[1] != 0.0; };
    b.metric = [mu, printed](const Point& q) {
        const ErComponents e = er_bridge_components(mu, q[1], printed);
        return Matrix::diagonal({e.g_tt, e.g_uu});
    };
    b.warp = [mu, printed](const Point& q) { return std::sqrt(er_bridge_components(mu, q[1], printed).sphere); };
    if (!printed) {
        b.metric_gradient = [mu](const Point& q) {
            const double u = q[1];
            const double a = u * u + mu;
            MetricGradient d(2);
            d.dg[1](0, 0) = -2.0 * u * mu / (a * a);
            d.dg[1](1, 1) = 8.0 * u;
            return d;
        };
        b.warp_gradient = [](const Point& q) { return Tangent{0.0, 2.0 * q[1]}; };
    }
    ChartSpec c = make_warped_chart(printed ? "er_bridge_paper" : "er_bridge", mu, {"t", "u"}, b);
    c.component = [](const Point& p) { return p[1] > 0.0 ? 0 : 1; };
    c.boundary_distance = [mu](const Point& p) { return std::abs(p[1]) / std::sqrt(mu); };
    c.time_reference = [](const Point&) { return Tangent{1.0, 0.0, 0.0, 0.0}; };
    c.killing_field = [](const Point&) { return std::optional<Tangent>(Tangent{1.0, 0.0, 0.0, 0.0}); };
    c.region_tag = [](const Point& p) { return std::string(p[1] > 0.0 ? "N1" : "N2"); };
    return c;
}

// dR^2 + (R - mu)^2 dOmega^2 on R > mu: flat space with the origin at R = mu.
inline ChartSpec make_euclid_shifted_chart(double mu) {
    WarpedBase b;
    b.dim = 1;
    b.domain = [mu](const Point& q) { return q[0] > mu && std::isfinite(q[0]); };
    b.metric = [](const Point&) { return Matrix::diagonal({1.0}); };
    b.metric_gradient = [](const Point&) { return MetricGradient(1); };
    b.warp = [mu](const Point& q) { return q[0] - mu; };
    b.warp_gradient = [](const Point&) { return Tangent{1.0}; };
    ChartSpec c = make_warped_chart("euclid_shifted", mu, {"R"}, b);
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [mu](const Point& p) { return (p[0] - mu) / mu; };
    return c;
}

inline ChartSpec make_minkowski_chart(double mu = 1.0) {
    ChartSpec c;
    c.id = "minkowski";
    c.mass = mu;
    c.dim = 4;
    c.coord_names = {"t", "x", "y", "z"};
    c.domain = [](const Point& p) { return detail::finite_all(p); };
    c.metric = [](const Point&) { return Matrix::diagonal({-1.0, 1.0, 1.0, 1.0}); };
    c.metric_gradient = [](const Point&) { return MetricGradient(4); };
    c.christoffel_closed = [](const Point&) { return Christoffel(4); };
    c.component = [](const Point&) { return 0; };
    c.boundary_distance = [](const Point&) { return 1e300; };
    c.time_reference = [](const Point&) { return Tangent{1.0, 0.0, 0.0, 0.0}; };
    c.killing_field = [](const Point&) { return std::optional<Tangent>(Tangent{1.0, 0.0, 0.0, 0.0}); };
    c.region_tag = [](const Point&) { return std::string("Flat"); };
    return c;
}

inline const std::vector<std::string>& chart_ids() {
    static const std::vector<std::string> ids = {
        "hd",           "hd_plane",        "schwarzschild_unimodular", "uniquely2",    "ks",
        "ks_plane",     "painleve_gullstrand", "eddington_paper",      "eddington_derived",
        "lemaitre_paper", "lemaitre_alt",  "kruskal_xy",               "er_bridge",    "er_bridge_paper",
        "euclid_shifted", "minkowski"};
    return ids;
}

inline ChartSpec make_chart(const std::string& id, double mu) {
    if (!(mu > 0.0)) throw DomainError("mass must be positive");
    if (id == "hd") return make_hd_chart(mu);
    if (id == "hd_plane") return make_hd_chart(mu, true);
    if (id == "schwarzschild_unimodular") return make_static_model_chart(id, unimodular_model(mu));
    if (id == "uniquely2") return make_static_model_chart(id, uniquely2_model(mu));
    if (id == "ks") return make_ks_chart(mu);
    if (id == "ks_plane") return make_ks_chart(mu, true);
    if (id == "painleve_gullstrand") return make_painleve_gullstrand_chart(mu);
    if (id == "eddington_paper") return make_eddington_chart(mu, true);
    if (id == "eddington_derived") return make_eddington_chart(mu, false);
    if (id == "lemaitre_paper") return make_lemaitre_chart(mu, 2.0 / 3.0, id);
    if (id == "lemaitre_alt") return make_lemaitre_chart(mu, 1.5, id);
    if (id == "kruskal_xy") return make_kruskal_xy_chart(mu);
    if (id == "er_bridge") return make_er_chart(mu, false);
    if (id == "er_bridge_paper") return make_er_chart(mu, true);
    if (id == "euclid_shifted") return make_euclid_shifted_chart(mu);
    if (id == "minkowski") return make_minkowski_chart(mu);
    throw DomainError("unknown chart id: " + id);
}

// ---- transitions ---------------------------------------------------------

struct TransitionMap {
    std::string source;
    std::string target;
    std::string branch;
    std::function<Point(const Point&)> forward;
    std::function<Point(const Point&)> inverse;
    std::function<bool(const Point&)> domain;
};

namespace detail {

// Apply a map on the first two coordinates, passing the rest through.
inline Point map_first_two(const Point& p, std::pair<double, double> ab) {
    Point q = p;
    q[0] = ab.first;
    q[1] = ab.second;
    return q;
}

}  // namespace detail

// Transitions out of the HD chart (or between other pairs). Dimension follows
// the source chart: "hd"/"ks" act on 4-tuples, "hd_plane"/"ks_plane" on pairs.
inline TransitionMap make_transition(const std::string& source, const std::string& target, const std::string& branch,
                                     double mu) {
    TransitionMap tm;
    tm.source = source;
    tm.target = target;
    tm.branch = branch;
    const bool hd_src = source == "hd" || source == "hd_plane";
    if (hd_src && (target == "ks" || target == "ks_plane")) {
        const Region reg = region_from_string(branch);
        const bool outer = reg == Region::R_II_plus || reg == Region::R_II_minus;
        tm.domain = [mu, outer](const Point& p) {
            return std::isfinite(p[0]) && (outer ? p[1] > mu : (p[1] > 0.0 && p[1] < mu));
        };
        tm.forward = [mu, reg](const Point& p) { return detail::map_first_two(p, hd_to_ks(mu, reg, p[0], p[1])); };
        tm.inverse = [mu](const Point& q) {
            const HdCoords h = ks_to_hd(mu, q[0], q[1]);
            return detail::map_first_two(q, {h.t, h.r});
        };
        return tm;
    }
    if (hd_src) {
        Historical kind;
        if (target == "painleve_gullstrand") kind = Historical::painleve_gullstrand;
        else if (target == "eddington_paper" || target == "eddington_derived") kind = Historical::eddington;
        else if (target == "kruskal_xy") kind = Historical::kruskal_xy;
        else throw DomainError("no transition " + source + " -> " + target);
        const bool ext_only = kind == Historical::kruskal_xy;
        tm.domain = [mu, ext_only](const Point& p) {
            return std::isfinite(p[0]) && p[1] > 0.0 && p[1] != mu && (!ext_only || p[1] > mu);
        };
        tm.forward = [mu, kind](const Point& p) {
            return detail::map_first_two(p, historical_transform(kind, mu, p[0], p[1]));
        };
        tm.inverse = [mu, kind](const Point& q) {
            return detail::map_first_two(q, historical_inverse(kind, mu, q[0], q[1]));
        };
        return tm;
    }
    if (source == "schwarzschild_unimodular" && target == "hd") {
        tm.domain = [](const Point& p) { return std::isfinite(p[0]) && p[1] > 0.0; };
        tm.forward = [mu](const Point& p) { return detail::map_first_two(p, {p[0], unimodular_transition(mu, p[1])}); };
        tm.inverse = [mu](const Point& q) { return detail::map_first_two(q, {q[0], unimodular_inverse(mu, q[1])}); };
        return tm;
    }
    if ((source == "er_bridge" || source == "er_bridge_paper") && target == "hd") {
        const double sign = branch == "N2" ? -1.0 : 1.0;
        tm.domain = [sign](const Point& p) { return std::isfinite(p[0]) && sign * p[1] > 0.0; };
        tm.forward = [mu](const Point& p) { return detail::map_first_two(p, {p[0], p[1] * p[1] + mu}); };
        tm.inverse = [mu, sign](const Point& q) {
            if (!(q[1] > mu)) throw DomainError("er_bridge inverse: needs r > mu");
            return detail::map_first_two(q, {q[0], sign * std::sqrt(q[1] - mu)});
        };
        return tm;
    }
    throw DomainError("no transition " + source + " -> " + target);
}

// Numeric Jacobian J(i, j) = d forward^i / d x^j, fourth-order differences.
inline Matrix transition_jacobian(const TransitionMap& tm, const Point& p) {
    const std::size_t n = p.size();
    Matrix J(n);
    auto fn = [&](const Point& q) {
        if (!tm.domain(q)) throw DomainError(tm.source + " -> " + tm.target + ": stencil leaves the branch domain");
        return tm.forward(q);
    };
    for (std::size_t j = 0; j < n; ++j) {
        const Point col = central_diff4(fn, p, j, fd_step(p[j]));
        for (std::size_t i = 0; i < n; ++i) J(i, j) = col[i];
    }
    return J;
}

// Push a tangent vector through the transition.
inline Tangent push_forward(const TransitionMap& tm, const Point& p, const Tangent& x) {
    const Matrix J = transition_jacobian(tm, p);
    Tangent y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) y[i] += J(i, j) * x[j];
    return y;
}

// max_ij |(J^T g_target J)_ij - g_source_ij| at p.
inline double transition_pullback_residual(const TransitionMap& tm, const ChartSpec& src, const ChartSpec& tgt,
                                           const Point& p) {
    if (!tm.domain(p)) throw DomainError(tm.source + " -> " + tm.target + ": point outside branch domain");
    const Matrix J = transition_jacobian(tm, p);
    const Matrix G = metric_eval(tgt, tm.forward(p));
    const Matrix g = metric_eval(src, p);
    const std::size_t n = p.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) s += J(a, i) * G(a, b) * J(b, j);
            worst = std::max(worst, std::abs(s - g(i, j)));
        }
    return worst;
}

}  // namespace hdks
