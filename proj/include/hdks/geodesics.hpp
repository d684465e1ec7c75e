#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdks/chart.hpp"
#include "hdks/charts.hpp"
#include "hdks/errors.hpp"
#include "hdks/geometry.hpp"
#include "hdks/ks_profile.hpp"
#include "hdks/rk.hpp"

namespace hdks {

struct GeodesicState {
    Point x;
    Tangent v;
    double lambda = 0.0;
};

enum class Termination { affine_budget, domain_exit, curvature_blowup, step_underflow };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::affine_budget: return "affine_budget";
        case Termination::domain_exit: return "domain_exit";
        case Termination::curvature_blowup: return "curvature_blowup";
        case Termination::step_underflow: return "step_underflow";
    }
    return "?";
}

struct IntegrationConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = -1.0;  // <= 0 means 0.1 mu
    double lambda_max = 10.0;
    bool horizon_events = true;
    bool blowup_events = true;
    double blowup_S = 1e8;   // in units of 1/mu^2
    double blowup_r = 1e-3;  // in units of mu
    double boundary_eps = 1e-9;
    std::size_t max_steps = 2000000;
    std::optional<Scheme> scheme;
};

struct Sample {
    double lambda = 0.0;
    Point x;
    Tangent v;
    std::optional<double> energy;
    double norm = 0.0;
    std::string region;
};

struct GeodesicEvent {
    std::string kind;
    double lambda = 0.0;
    Point x;
};

struct Trajectory {
    std::string chart;
    std::vector<Sample> samples;
    std::vector<GeodesicEvent> events;
    Termination termination = Termination::affine_budget;
    bool horizon_crossed = false;

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }

    double max_norm_drift() const {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, std::abs(s.norm - samples.front().norm));
        return m;
    }
    // Largest |E(lambda) - E(0)| over samples where E is defined at both ends.
    double max_energy_drift() const {
        double m = 0.0;
        std::optional<double> e0;
        for (const auto& s : samples) {
            if (!s.energy) continue;
            if (!e0) e0 = s.energy;
            m = std::max(m, std::abs(*s.energy - *e0));
        }
        return m;
    }
};

// E = -g(K, x) for the chart's static Killing field; absent where the chart
// has none (the Kruskal horizon, or charts without one).
inline std::optional<double> killing_energy(const ChartSpec& chart, const Point& x, const Tangent& v) {
    if (!chart.killing_field) return std::nullopt;
    const auto K = chart.killing_field(x);
    if (!K) return std::nullopt;
    return -metric_eval(chart, x).quadratic(*K, v);
}

inline std::optional<double> killing_energy(const ChartSpec& chart, const GeodesicState& s) {
    return killing_energy(chart, s.x, s.v);
}

// Horizon locator: uv on Kruskal charts, r - mu where r is a coordinate
// regular across r = mu.
inline std::function<double(const Point&)> horizon_function(const ChartSpec& chart) {
    if (chart.id == "ks" || chart.id == "ks_plane") return [](const Point& p) { return p[0] * p[1]; };
    if (chart.id == "painleve_gullstrand" || chart.id == "eddington_paper" || chart.id == "eddington_derived") {
        const double mu = chart.mass;
        return [mu](const Point& p) { return p[1] - mu; };
    }
    return {};
}

namespace detail {

struct DomainLeft {};

inline OdeState pack(const Point& x, const Tangent& v) {
    OdeState s;
    const std::size_t n = x.size();
    s.n = 2 * n;
    for (std::size_t i = 0; i < n; ++i) {
        s.y[i] = x[i];
        s.y[n + i] = v[i];
    }
    return s;
}

inline void unpack(const OdeState& s, Point& x, Tangent& v) {
    const std::size_t n = s.n / 2;
    x = Point(n);
    v = Tangent(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = s.y[i];
        v[i] = s.y[n + i];
    }
}

}  // namespace detail

// Adaptive Dormand-Prince integration of x'' + Gamma(x', x') = 0. Steps whose
// stages leave the chart domain or change the connected component are
// rejected and shrunk. Horizon crossings are logged; curvature blow-up and
// domain exit end the run.
inline Trajectory integrate(const ChartSpec& chart, const GeodesicState& start, const IntegrationConfig& cfg) {
    require_domain(chart, start.x);
    if (start.v.size() != chart.dim) throw DomainError(chart.id + ": velocity has the wrong size");
    if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0) || !(cfg.lambda_max >= 0.0))
        throw DomainError("integrate: tolerances and affine budget must be positive");

    const std::size_t n = chart.dim;
    const double mu = chart.mass;
    const Scheme scheme = cfg.scheme.value_or(preferred_scheme(chart));
    const int comp0 = chart.component_of(start.x);
    const double hmax = cfg.max_step > 0.0 ? cfg.max_step : 0.1 * mu;

    auto rhs = [&](const OdeState& s, OdeState& ds) {
        Point x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = s.y[i];
        if (!chart.domain(x) || chart.component_of(x) != comp0) throw detail::DomainLeft{};
        Christoffel G(n);
        try {
            G = scheme == Scheme::closed_form ? detail::christoffel_closed_unchecked(chart, x)
                                              : detail::christoffel_fd_rel(chart, x, 1e-4);
        } catch (const DomainError&) {
            throw detail::DomainLeft{};
        }
        ds.n = s.n;
        for (std::size_t k = 0; k < n; ++k) {
            ds.y[k] = s.y[n + k];
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) acc += G(k, i, j) * s.y[n + i] * s.y[n + j];
            ds.y[n + k] = -acc;
        }
        for (std::size_t i = 0; i < s.n; ++i)
            if (!std::isfinite(ds.y[i])) throw detail::DomainLeft{};
    };

    const auto horizon = cfg.horizon_events ? horizon_function(chart) : std::function<double(const Point&)>{};
    const bool blowup = cfg.blowup_events && chart.sectional_closed && chart.areal_radius;
    const double S_max = cfg.blowup_S / (mu * mu);
    const double r_min = cfg.blowup_r * mu;
    // Positive while inside the allowed curvature range.
    auto blowup_margin = [&](const Point& x) {
        const double r = chart.areal_radius(x);
        if (!(r > r_min)) return -1.0;
        const double S = std::abs(chart.sectional_closed(x));
        return std::min(1.0 - S / S_max, r / r_min - 1.0);
    };

    Trajectory traj;
    traj.chart = chart.id;
    auto record = [&](double lam, const Point& x, const Tangent& v) {
        Sample s;
        s.lambda = lam;
        s.x = x;
        s.v = v;
        s.energy = killing_energy(chart, x, v);
        s.norm = chart.metric(x).quadratic(v, v);
        s.region = chart.region_tag ? chart.region_tag(x) : std::string();
        traj.samples.push_back(std::move(s));
    };

    OdeState y = detail::pack(start.x, start.v);
    double lam = start.lambda;
    const double lam_end = start.lambda + cfg.lambda_max;
    record(lam, start.x, start.v);
    if (blowup && blowup_margin(start.x) <= 0.0) {
        traj.termination = Termination::curvature_blowup;
        return traj;
    }

    double h = std::min(hmax, std::max(cfg.lambda_max, 1e-300)) * 0.1;
    if (cfg.lambda_max == 0.0) {
        traj.termination = Termination::affine_budget;
        return traj;
    }
    bool stage_left = false;
    for (std::size_t step = 0; step < cfg.max_steps; ++step) {
        if (lam >= lam_end) {
            traj.termination = Termination::affine_budget;
            return traj;
        }
        Point x;
        Tangent v;
        detail::unpack(y, x, v);
        if (chart.boundary_distance && chart.boundary_distance(x) < cfg.boundary_eps) {
            traj.termination = Termination::domain_exit;
            return traj;
        }
        h = std::min({h, hmax, lam_end - lam});
        const double hmin = 1e-14 * (mu + std::abs(lam));
        if (h < hmin) {
            const bool near_edge = stage_left || (chart.boundary_distance && chart.boundary_distance(x) < 1e-4);
            traj.termination = near_edge ? Termination::domain_exit : Termination::step_underflow;
            return traj;
        }
        Dp45Result res;
        try {
            res = dp45_step(rhs, y, h, cfg.rtol, cfg.atol);
        } catch (const detail::DomainLeft&) {
            stage_left = true;
            h *= 0.25;
            continue;
        }
        if (!(res.err <= 1.0)) {
            h = std::isfinite(res.err) ? dp45_next_step(h, res.err) : h * 0.25;
            continue;
        }
        stage_left = false;
        Point xn;
        Tangent vn;
        detail::unpack(res.y5, xn, vn);

        // Locate a sign change of ev inside the accepted step by bisection on
        // the fraction of a single step from y.
        auto locate = [&](const std::function<double(const Point&)>& ev) {
            const double e0 = ev(x);
            double lo = 0.0, hi = 1.0;
            OdeState at = res.y5;
            for (int it = 0; it < 60 && (hi - lo) * h > 1e-14 * (mu + std::abs(lam)); ++it) {
                const double mid = 0.5 * (lo + hi);
                OdeState ym;
                try {
                    ym = dp45_step(rhs, y, mid * h, cfg.rtol, cfg.atol).y5;
                } catch (const detail::DomainLeft&) {
                    hi = mid;
                    continue;
                }
                Point xm;
                Tangent vm;
                detail::unpack(ym, xm, vm);
                if ((ev(xm) > 0.0) == (e0 > 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                    at = ym;
                }
            }
            return std::pair<double, OdeState>{hi, at};
        };

        if (blowup && blowup_margin(xn) <= 0.0) {
            auto [frac, at] = locate(blowup_margin);
            Point xe;
            Tangent ve;
            detail::unpack(at, xe, ve);
            record(lam + frac * h, xe, ve);
            traj.events.push_back({"curvature_blowup", lam + frac * h, xe});
            traj.termination = Termination::curvature_blowup;
            return traj;
        }
        if (horizon) {
            const double a = horizon(x), b = horizon(xn);
            if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
                auto [frac, at] = locate(horizon);
                Point xe;
                Tangent ve;
                detail::unpack(at, xe, ve);
                traj.events.push_back({"horizon_crossed", lam + frac * h, xe});
                traj.horizon_crossed = true;
            }
        }
        y = res.y5;
        lam += h;
        if (lam_end - lam < 1e-14 * (mu + std::abs(lam_end))) lam = lam_end;
        record(lam, xn, vn);
        h = dp45_next_step(h, res.err);
    }
    traj.termination = Termination::step_underflow;
    return traj;
}

// exp_p(x) = gamma_x(1), together with gamma_x'(1).
inline GeodesicState geodesic_endpoint(const ChartSpec& chart, const Point& p, const Tangent& x,
                                       IntegrationConfig cfg = {}) {
    cfg.lambda_max = 1.0;
    cfg.horizon_events = false;
    const Trajectory tr = integrate(chart, GeodesicState{p, x, 0.0}, cfg);
    if (tr.termination != Termination::affine_budget || tr.back().lambda < 1.0)
        throw DomainExit(chart.id + ": geodesic leaves the chart before lambda = 1 (" + to_string(tr.termination) +
                         ")");
    return GeodesicState{tr.back().x, tr.back().v, 1.0};
}

inline Point exp_map(const ChartSpec& chart, const Point& p, const Tangent& x, const IntegrationConfig& cfg = {}) {
    return geodesic_endpoint(chart, p, x, cfg).x;
}

// Inverse of exp_p near p by Newton shooting on the initial velocity, with a
// finite-difference Jacobian of the endpoint map.
inline Tangent log_map(const ChartSpec& chart, const Point& p, const Point& q, double tol = 1e-10,
                       int max_iter = 30) {
    const std::size_t n = chart.dim;
    Tangent x = (q - p).as<TangentTag>();
    const double scale = std::max(1.0, q.max_abs());
    for (int it = 0; it < max_iter; ++it) {
        const Point e = exp_map(chart, p, x);
        const Point res = e - q;
        if (res.max_abs() <= tol * scale) return x;
        Matrix J(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = 1e-6 * std::max(1.0, std::abs(x[j]));
            Tangent xp = x, xm = x;
            xp[j] += d;
            xm[j] -= d;
            const Point col = exp_map(chart, p, xp) - exp_map(chart, p, xm);
            for (std::size_t i = 0; i < n; ++i) J(i, j) = col[i] / (2.0 * d);
        }
        const auto [det, inv] = det_and_inverse(J);
        (void)det;
        Tangent dx(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) dx[i] -= inv(i, j) * res[j];
        x += dx;
    }
    throw ToleranceNotMet(chart.id + ": log_map shooting did not converge");
}

// Radial null geodesic of the HD plane: r = eps s, t = s + eps mu log|mu - eps s|.
inline std::pair<double, double> radial_null_closed_form(double mu, int eps, double s) {
    if (eps != 1 && eps != -1) throw DomainError("radial_null_closed_form: eps must be +1 or -1");
    const double r = eps * s;
    if (!(r > 0.0) || r == mu) throw DomainError("radial_null_closed_form: needs eps*s > 0 and eps*s != mu");
    return {s + eps * mu * std::log(std::abs(mu - r)), r};
}

// ---- reproducible sampling -----------------------------------------------

// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne
// twister, so streams are identical across standard libraries.
class Uniform01 {
public:
    explicit Uniform01(std::uint64_t seed) : eng_(seed) {}
    double operator()() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double in(double a, double b) { return a + (b - a) * (*this)(); }

private:
    std::mt19937_64 eng_;
};

struct CaptureReport {
    std::string region;
    std::size_t trials = 0;
    std::size_t monotone = 0;  // trials with the expected sign of (r o gamma)'
    std::size_t blowups = 0;
    double worst_rate = 0.0;   // least favourable d r / d lambda seen
};

// Future-pointing null geodesics launched at random points of R_I_plus (or
// R_I_minus) of the 4-D Kruskal chart; checks the sign of (r o gamma)' while
// the curve stays in its launch region.
inline CaptureReport capture_check(double mu, std::size_t trials, std::uint64_t seed,
                                   Region region = Region::R_I_plus) {
    if (region != Region::R_I_plus && region != Region::R_I_minus)
        throw DomainError("capture_check: region must be R_I_plus or R_I_minus");
    CaptureReport rep;
    rep.region = to_string(region);
    rep.trials = trials;
    rep.worst_rate = region == Region::R_I_plus ? -std::numeric_limits<double>::infinity()
                                                : std::numeric_limits<double>::infinity();
    if (trials == 0) {
        rep.worst_rate = 0.0;
        return rep;
    }
    const ChartSpec ks = make_chart("ks", mu);
    const KsProfile prof(mu);
    Uniform01 rng(seed);
    const double su = region == Region::R_I_plus ? 1.0 : -1.0;
    const double b = 1.5 * std::sqrt(mu);
    IntegrationConfig cfg;
    cfg.lambda_max = 10.0 * mu;
    for (std::size_t k = 0; k < trials; ++k) {
        double u, v;
        do {
            u = su * rng.in(0.02, 1.0) * b;
            v = -su * rng.in(0.02, 1.0) * b;
        } while (!(u * v > -0.9 * mu));
        const double th = rng.in(0.2, M_PI - 0.2);
        const double ph = rng.in(0.0, 2.0 * M_PI);
        const Point p{u, v, th, ph};
        const double r = prof.f_inv(u * v);
        const double F = prof.F(r);
        // null: F a b + r^2 (w1^2 + sin^2 w2^2) = 0, future root a > 0
        const double a = std::exp(rng.in(-1.0, 1.0));
        const double w1 = rng.in(-1.0, 1.0) / r;
        const double w2 = rng.in(-1.0, 1.0) / r;
        const double ang = r * r * (w1 * w1 + std::sin(th) * std::sin(th) * w2 * w2);
        const Tangent x{a, -ang / (F * a), w1, w2};
        const Trajectory tr = integrate(ks, GeodesicState{p, x, 0.0}, cfg);
        if (tr.termination == Termination::curvature_blowup) ++rep.blowups;
        bool ok = true;
        for (const auto& s : tr.samples) {
            if (s.region != rep.region) break;
            const double rs = prof.f_inv(s.x[0] * s.x[1]);
            const double rate = (s.x[1] * s.v[0] + s.x[0] * s.v[1]) / prof.df(rs);
            if (region == Region::R_I_plus) {
                rep.worst_rate = std::max(rep.worst_rate, rate);
                if (!(rate < 0.0)) ok = false;
            } else {
                rep.worst_rate = std::min(rep.worst_rate, rate);
                if (!(rate > 0.0)) ok = false;
            }
        }
        if (ok) ++rep.monotone;
    }
    return rep;
}

struct MaximalityReport {
    std::size_t launches = 0;
    std::size_t blowups = 0;
    std::size_t budget = 0;
    std::size_t other = 0;  // any other termination
    std::vector<std::string> other_reasons;
    bool holds() const { return other == 0; }
};

// Null geodesics launched on a lattice of points in all four regions of the
// 4-D Kruskal chart, alternating future and past directions. An inextendible
// chart ends only at the singularity or when the affine budget runs out.
inline MaximalityReport maximality_sweep(double mu, std::size_t launches = 200, std::uint64_t seed = 5) {
    MaximalityReport rep;
    const ChartSpec ks = make_chart("ks", mu);
    const KsProfile prof(mu);
    Uniform01 rng(seed);
    IntegrationConfig cfg;
    cfg.lambda_max = 10.0 * mu;
    const double b = 1.5 * std::sqrt(mu);
    static constexpr double su[4] = {1.0, -1.0, 1.0, -1.0};
    static constexpr double sv[4] = {1.0, -1.0, -1.0, 1.0};
    for (std::size_t k = 0; k < launches; ++k) {
        const std::size_t q = k % 4;
        double u, v;
        do {
            u = su[q] * rng.in(0.05, 1.0) * b;
            v = sv[q] * rng.in(0.05, 1.0) * b;
        } while (!(u * v > -0.9 * mu));
        const double th = rng.in(0.2, M_PI - 0.2);
        const Point p{u, v, th, rng.in(0.0, 2.0 * M_PI)};
        const double r = prof.f_inv(u * v);
        const double F = prof.F(r);
        const double dir = (k / 4) % 2 == 0 ? 1.0 : -1.0;
        const double a = dir * std::exp(rng.in(-1.0, 1.0));
        const double w1 = rng.in(-1.0, 1.0) / r;
        const double w2 = rng.in(-1.0, 1.0) / r;
        const double ang = r * r * (w1 * w1 + std::sin(th) * std::sin(th) * w2 * w2);
        const Tangent x{a, -ang / (F * a), w1, w2};
        const Trajectory tr = integrate(ks, GeodesicState{p, x, 0.0}, cfg);
        ++rep.launches;
        if (tr.termination == Termination::curvature_blowup) ++rep.blowups;
        else if (tr.termination == Termination::affine_budget) ++rep.budget;
        else {
            ++rep.other;
            rep.other_reasons.push_back(to_string(tr.termination));
        }
    }
    return rep;
}

struct NoTraversalReport {
    double mu = 0.0;
    double f_at_zero = 0.0;   // f(r(gamma(0))) from the closed form
    bool equals_minus_mu = false;
    double min_r = 0.0;       // smallest r on the integrated curve
    bool entered_far_side = false;  // any sample with u < 0 and v < 0
    std::string termination;
    double max_v_error = 0.0;  // |v_numeric - v_closed| on the integrated stretch
};

// The in-going null geodesic u = 1, v(s) = -(s + mu) exp(-s/mu), s < 0,
// has f(r) = uv -> -mu at s = 0: it ends at r = 0 instead of reaching R_II_minus.
inline NoTraversalReport no_traversal_demo(double mu) {
    if (!(mu > 0.0)) throw DomainError("no_traversal_demo: mu must be positive");
    auto vs = [mu](double s) { return -(s + mu) * std::exp(-s / mu); };
    NoTraversalReport rep;
    rep.mu = mu;
    rep.f_at_zero = 1.0 * vs(0.0);
    rep.equals_minus_mu = rep.f_at_zero == -mu;

    // Integrate from s0 = -2 mu along the u = 1 line with the parameter s,
    // which is affine for this curve.
    const double s0 = -2.0 * mu;
    const double dv = std::exp(-s0 / mu) * (s0 / mu);
    const ChartSpec ks = make_chart("ks_plane", mu);
    IntegrationConfig cfg;
    cfg.lambda_max = 4.0 * mu;
    const Trajectory tr = integrate(ks, GeodesicState{Point{1.0, vs(s0)}, Tangent{0.0, dv}, s0}, cfg);
    const KsProfile prof(mu);
    rep.min_r = std::numeric_limits<double>::infinity();
    for (const auto& s : tr.samples) {
        rep.min_r = std::min(rep.min_r, prof.f_inv(s.x[0] * s.x[1]));
        if (s.x[0] < 0.0 && s.x[1] < 0.0) rep.entered_far_side = true;
        rep.max_v_error = std::max(rep.max_v_error, std::abs(s.x[1] - vs(s.lambda)) / std::max(1.0, std::abs(vs(s.lambda))));
    }
    rep.termination = to_string(tr.termination);
    return rep;
}

// ---- export ----------------------------------------------------------------

// CSV: lambda, coordinates, velocities, E, norm, region; termination in a
// trailing comment row.
inline void write_trajectory_csv(std::ostream& os, const ChartSpec& chart, const Trajectory& tr,
                                 const std::function<std::string(double)>& fmt) {
    os << "lambda";
    for (const auto& c : chart.coord_names) os << ',' << c;
    for (const auto& c : chart.coord_names) os << ",d" << c;
    os << ",E,norm,region\n";
    for (const auto& s : tr.samples) {
        os << fmt(s.lambda);
        for (double c : s.x) os << ',' << fmt(c);
        for (double c : s.v) os << ',' << fmt(c);
        os << ',' << (s.energy ? fmt(*s.energy) : std::string()) << ',' << fmt(s.norm) << ',' << s.region << '\n';
    }
    os << "# termination=" << to_string(tr.termination) << " horizon_crossed=" << (tr.horizon_crossed ? 1 : 0)
       << '\n';
}

}  // namespace hdks
