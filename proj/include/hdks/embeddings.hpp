#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "hdks/chart.hpp"
#include "hdks/charts.hpp"
#include "hdks/errors.hpp"
#include "hdks/geodesics.hpp"
#include "hdks/linalg.hpp"
#include "hdks/quadrature.hpp"

namespace hdks {

// Flat six-dimensional vector manifold with a diagonal metric of signs.
struct AmbientFlat6 {
    std::array<int, 6> signature{};

    static AmbientFlat6 kasner() { return {{-1, -1, 1, 1, 1, 1}}; }
    static AmbientFlat6 fronsdal() { return {{-1, 1, 1, 1, 1, 1}}; }
    // Signs implied by the imbedding conditions written for the Kasner map.
    static AmbientFlat6 kasner_conditions() { return {{1, 1, -1, 1, 1, 1}}; }

    int index() const {
        int n = 0;
        for (int s : signature) n += s < 0;
        return n;
    }
    double inner(const Point& a, const Point& b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < 6; ++i) s += signature[i] * a[i] * b[i];
        return s;
    }
};

enum class WKind { kasner, fronsdal, fronsdal_paper };

inline WKind w_kind_from_string(const std::string& s) {
    if (s == "kasner") return WKind::kasner;
    if (s == "fronsdal") return WKind::fronsdal;
    if (s == "fronsdal_paper") return WKind::fronsdal_paper;
    throw DomainError("unknown W kind: " + s);
}

// W' for each kind:
//   kasner:          sqrt(1 + 16 mu^4 / (s^2 + 4 mu^2)^3)
//   fronsdal:        sqrt(mu (h^2 + mu h + mu^2) / h^3), the value the isometry needs
//   fronsdal_paper:  sqrt((h + mu)(h^2 + mu^2) / h^3), exactly 1 more under the root
inline double w_integrand(double mu, WKind kind, double h) {
    switch (kind) {
        case WKind::kasner: {
            const double d = h * h + 4.0 * mu * mu;
            return std::sqrt(1.0 + 16.0 * std::pow(mu, 4) / (d * d * d));
        }
        case WKind::fronsdal:
            if (!(h > 0.0)) throw DomainError("fronsdal integrand needs h > 0");
            return std::sqrt(mu * (h * h + mu * h + mu * mu) / (h * h * h));
        case WKind::fronsdal_paper:
            if (!(h > 0.0)) throw DomainError("fronsdal integrand needs h > 0");
            return std::sqrt((h + mu) * (h * h + mu * mu) / (h * h * h));
    }
    return 0.0;
}

// Integral of the W' of the given kind from base to x, to absolute 1e-11.
inline double w_integral(double mu, WKind kind, double x, double base) {
    if (!(mu > 0.0)) throw DomainError("w_integral: mu must be positive");
    if (kind == WKind::kasner) {
        if (!(x >= 0.0) || !(base >= 0.0)) throw DomainError("w_integral kasner: needs x, base >= 0");
    } else if (!(x > 0.0) || !(base > 0.0)) {
        throw DomainError("w_integral fronsdal: needs x, base > 0");
    }
    return integrate_gk([&](double h) { return w_integrand(mu, kind, h); }, base, x, 1e-11).value;
}

// Default lower limits: 0 for Kasner, mu for Fronsdal (the printed lower
// limit 0 makes the Fronsdal integral diverge).
inline double w_default_base(double mu, WKind kind) { return kind == WKind::kasner ? 0.0 : mu; }

inline std::array<double, 3> sphere_point(double radius, double theta, double phi) {
    return {radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
            radius * std::cos(theta)};
}

inline Point kasner_embed(double mu, double t, double H, double theta, double phi) {
    if (!(H > 0.0)) throw DomainError("kasner_embed: H must be positive");
    const double a = H / std::sqrt(H * H + 4.0 * mu * mu);
    const auto x = sphere_point(H, theta, phi);
    return Point{a * std::sin(t), a * std::cos(t), w_integral(mu, WKind::kasner, H, 0.0), x[0], x[1], x[2]};
}

enum class FronsdalBranch { exterior, interior };

inline const char* to_string(FronsdalBranch b) { return b == FronsdalBranch::exterior ? "exterior" : "interior"; }

namespace detail {

// Fronsdal map with u3 measured from an arbitrary anchor radius.
inline Point fronsdal_point(double mu, FronsdalBranch branch, double t, double r, double theta, double phi,
                            bool mirror, WKind kind, double anchor) {
    if (!(r > 0.0) || r == mu) throw DomainError("fronsdal_embed: needs r > 0 and r != mu");
    if (branch == FronsdalBranch::exterior && !(r > mu)) throw DomainError("fronsdal_embed: exterior needs r > mu");
    if (branch == FronsdalBranch::interior && !(r < mu)) throw DomainError("fronsdal_embed: interior needs r < mu");
    const double T = t / (2.0 * mu);
    double u1, u2;
    if (branch == FronsdalBranch::exterior) {
        const double A = 2.0 * mu * std::sqrt(1.0 - mu / r);
        u1 = A * std::sinh(T);
        u2 = A * std::cosh(T);
    } else {
        const double A = 2.0 * mu * std::sqrt(mu / r - 1.0);
        u1 = A * std::cosh(T);
        u2 = A * std::sinh(T);
    }
    if (mirror) {
        u1 = -u1;
        u2 = -u2;
    }
    const auto x = sphere_point(r, theta, phi);
    return Point{u1, u2, w_integral(mu, kind, r, anchor), x[0], x[1], x[2]};
}

}  // namespace detail

inline Point fronsdal_embed(double mu, FronsdalBranch branch, double t, double r, double theta, double phi,
                            bool mirror = false, WKind kind = WKind::fronsdal) {
    return detail::fronsdal_point(mu, branch, t, r, theta, phi, mirror, kind, mu);
}

// A map from a 4-D chart into a flat 6-D ambient space. `local` evaluates
// the map with any quadrature term anchored at a nearby base point so that
// difference quotients do not see the quadrature tolerance.
struct EmbeddingMap {
    std::string name;
    std::string branch;
    double mu = 1.0;
    AmbientFlat6 ambient;
    std::function<bool(const Point&)> domain;
    std::function<Point(const Point&)> map;
    std::function<Point(const Point&, const Point&)> local;  // (q, anchor)
    std::function<Matrix(const Point&)> chart_metric;
};

inline EmbeddingMap fronsdal_map(double mu, FronsdalBranch branch, bool mirror = false,
                                 WKind kind = WKind::fronsdal) {
    EmbeddingMap m;
    m.name = kind == WKind::fronsdal_paper ? "fronsdal_paper" : "fronsdal";
    m.branch = std::string(mirror ? "mirror_" : "") + to_string(branch);
    m.mu = mu;
    m.ambient = AmbientFlat6::fronsdal();
    const bool ext = branch == FronsdalBranch::exterior;
    m.domain = [mu, ext](const Point& p) {
        return std::isfinite(p[0]) && (ext ? p[1] > mu : (p[1] > 0.0 && p[1] < mu)) && p[2] > 0.0 && p[2] < M_PI;
    };
    m.map = [=](const Point& p) { return fronsdal_embed(mu, branch, p[0], p[1], p[2], p[3], mirror, kind); };
    m.local = [=](const Point& q, const Point& anchor) {
        return detail::fronsdal_point(mu, branch, q[0], q[1], q[2], q[3], mirror, kind, anchor[1]);
    };
    const ChartSpec hd = make_chart("hd", mu);
    m.chart_metric = [hd](const Point& p) { return hd.metric(p); };
    return m;
}

enum class KasnerTarget { printed, derived };

// Kasner map on the (t, H, theta, phi) chart. The printed chart metric
// -H^2/(H^2+4mu^2) dt^2 - dH^2 + (dH^2 + H^2 dOmega^2) is degenerate; the
// derived one is the Schwarzschild metric written through R = mu + H^2/(4 mu).
inline EmbeddingMap kasner_map(double mu, AmbientFlat6 ambient, KasnerTarget target) {
    EmbeddingMap m;
    m.name = "kasner";
    m.branch = "kasner_exterior";
    m.mu = mu;
    m.ambient = ambient;
    m.domain = [](const Point& p) { return std::isfinite(p[0]) && p[1] > 0.0 && p[2] > 0.0 && p[2] < M_PI; };
    m.map = [mu](const Point& p) { return kasner_embed(mu, p[0], p[1], p[2], p[3]); };
    m.local = [mu](const Point& q, const Point& anchor) {
        const double H = q[1];
        const double a = H / std::sqrt(H * H + 4.0 * mu * mu);
        const auto x = sphere_point(H, q[2], q[3]);
        return Point{a * std::sin(q[0]), a * std::cos(q[0]), w_integral(mu, WKind::kasner, H, anchor[1]),
                     x[0], x[1], x[2]};
    };
    m.chart_metric = [mu, target](const Point& p) {
        const double H = p[1];
        const double s2 = std::sin(p[2]) * std::sin(p[2]);
        const double gtt = -H * H / (H * H + 4.0 * mu * mu);
        if (target == KasnerTarget::printed) return Matrix::diagonal({gtt, -1.0 + 1.0, H * H, H * H * s2});
        const double R = mu + H * H / (4.0 * mu);
        return Matrix::diagonal({gtt, 1.0 + H * H / (4.0 * mu * mu), R * R, R * R * s2});
    };
    return m;
}

struct PullbackResult {
    Matrix difference;      // J^T eta J - g
    double absolute = 0.0;  // max |difference_ij|
    double relative = 0.0;  // max |difference_ij| / max(1, sum_a |J_ai eta_a J_aj|)
};

// Pullback of the ambient metric through a numeric Jacobian (fourth-order
// central differences, per-coordinate steps as in the geometry engine).
inline PullbackResult pullback(const EmbeddingMap& m, const Point& p) {
    if (!m.domain(p)) throw DomainError(m.name + ": point outside the branch domain");
    const std::size_t n = p.size();
    std::array<Point, kMaxDim> J;
    auto fn = [&](const Point& q) {
        if (!m.domain(q)) throw DomainError(m.name + ": stencil leaves the branch domain");
        return m.local(q, p);
    };
    for (std::size_t j = 0; j < n; ++j) J[j] = central_diff4(fn, p, j, fd_step(p[j]));
    const Matrix g = m.chart_metric(p);
    PullbackResult out{Matrix(n), 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0, mag = 0.0;
            for (std::size_t a = 0; a < 6; ++a) {
                const double term = m.ambient.signature[a] * J[i][a] * J[j][a];
                s += term;
                mag += std::abs(term);
            }
            const double d = s - g(i, j);
            out.difference(i, j) = d;
            out.absolute = std::max(out.absolute, std::abs(d));
            out.relative = std::max(out.relative, std::abs(d) / std::max(1.0, mag));
        }
    return out;
}

inline double pullback_residual(const EmbeddingMap& m, const Point& p) { return pullback(m, p).relative; }

struct FronsdalConstraints {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double max() const { return std::max({c1, c2, c3}); }
};

// Residuals of the three hypersurface equations, with r the spatial norm.
inline FronsdalConstraints fronsdal_constraints(double mu, const Point& q, WKind kind = WKind::fronsdal) {
    const double r2 = q[3] * q[3] + q[4] * q[4] + q[5] * q[5];
    const double r = std::sqrt(r2);
    if (!(r > 0.0)) throw DomainError("fronsdal_constraints: spatial norm is zero");
    FronsdalConstraints c;
    c.c1 = std::abs(q[1] * q[1] - q[0] * q[0] - 4.0 * mu * mu * (1.0 - mu / r));
    c.c2 = std::abs(q[2] - w_integral(mu, kind, r, mu));
    c.c3 = std::abs(q[3] * q[3] + q[4] * q[4] + q[5] * q[5] - r * r);
    return c;
}

// Mirror map: negate u1 and u2.
inline Point fronsdal_mirror(const Point& q) {
    Point m = q;
    m[0] = -m[0];
    m[1] = -m[1];
    return m;
}

struct RatioStats {
    std::size_t samples = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double mean = 0.0;
    void add(double x) {
        min = std::min(min, x);
        max = std::max(max, x);
        mean += (x - mean) / static_cast<double>(++samples);
    }
    double worst_deviation(double expected) const {
        return samples ? std::max(std::abs(min - expected), std::abs(max - expected)) : 0.0;
    }
};

struct HomothetyReport {
    double mu = 0.0;
    RatioStats ks;
    RatioStats fronsdal;
};

// Squared lengths of random sphere-tangent vectors on the Kruskal horizon
// (uv = 0) and on the Fronsdal horizon (spatial norm mu), divided by their
// unit-sphere lengths. Both ratios should be mu^2.
inline HomothetyReport horizon_homothety_check(double mu, std::size_t samples, std::uint64_t seed = 7) {
    HomothetyReport rep;
    rep.mu = mu;
    const ChartSpec ks = make_chart("ks", mu);
    Uniform01 rng(seed);
    for (std::size_t k = 0; k < samples; ++k) {
        const double th = rng.in(0.1, M_PI - 0.1), ph = rng.in(0.0, 2.0 * M_PI);
        const double a = rng.in(-1.0, 1.0), b = rng.in(-1.0, 1.0);
        const double unit = a * a + std::sin(th) * std::sin(th) * b * b;
        if (unit < 1e-6) continue;
        // alternate between the two null generators u = 0 and v = 0
        const double s = rng.in(-3.0, 3.0);
        const Point p = (k % 2 == 0) ? Point{0.0, s, th, ph} : Point{s, 0.0, th, ph};
        rep.ks.add(metric_eval(ks, p).quadratic(Tangent{0.0, 0.0, a, b}, Tangent{0.0, 0.0, a, b}) / unit);

        // Fronsdal horizon: u1 = u2 = c, u3 = W(mu) = 0, spatial point on the
        // sphere of radius mu. Induced length through the embedding.
        const double c = rng.in(-3.0, 3.0);
        auto emb = [&](const Point& q) {
            const auto x = sphere_point(mu, q[0], q[1]);
            return Point{c, c, 0.0, x[0], x[1], x[2]};
        };
        const Point base{th, ph};
        const Point dth = central_diff4(emb, base, 0, fd_step(th));
        const Point dph = central_diff4(emb, base, 1, fd_step(ph));
        const Point w = a * dth + b * dph;
        rep.fronsdal.add(AmbientFlat6::fronsdal().inner(w, w) / unit);
    }
    return rep;
}

// max |embed(t + 2 pi) - embed(t)| componentwise.
inline double kasner_periodicity_error(double mu, double t, double H, double theta, double phi) {
    return (kasner_embed(mu, t + 2.0 * M_PI, H, theta, phi) - kasner_embed(mu, t, H, theta, phi)).max_abs();
}

// Point cloud CSV: u1..u6, source chart coordinates, branch tag.
struct CloudPoint {
    Point u;
    Point source;
    std::string branch;
};

inline void write_point_cloud_csv(std::ostream& os, const std::vector<std::string>& source_names,
                                  const std::vector<CloudPoint>& pts, const std::function<std::string(double)>& fmt) {
    os << "u1,u2,u3,u4,u5,u6";
    for (const auto& n : source_names) os << ',' << n;
    os << ",branch\n";
    for (const auto& c : pts) {
        for (std::size_t i = 0; i < 6; ++i) os << (i ? "," : "") << fmt(c.u[i]);
        for (double x : c.source) os << ',' << fmt(x);
        os << ',' << c.branch << '\n';
    }
}

}  // namespace hdks
