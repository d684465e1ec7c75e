#include <catch_amalgamated.hpp>

#include <cmath>

#include "hdks/hdks.hpp"

using namespace hdks;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Future-pointing null vector of the 4-D Kruskal chart with angular part (w1, w2).
Tangent ks_null(double mu, const Point& p, double a, double w1, double w2) {
    const KsProfile prof(mu);
    const double r = prof.f_inv(p[0] * p[1]);
    const double ang = r * r * (w1 * w1 + std::sin(p[2]) * std::sin(p[2]) * w2 * w2);
    return Tangent{a, -ang / (prof.F(r) * a), w1, w2};
}

}  // namespace

TEST_CASE("Dormand-Prince step integrates y' = y") {
    OdeState y;
    y.n = 1;
    y.y[0] = 1.0;
    auto rhs = [](const OdeState& s, OdeState& d) { d.y[0] = s.y[0]; };
    double x = 0.0, h = 0.1;
    while (x < 1.0) {
        h = std::min(h, 1.0 - x);
        const Dp45Result r = dp45_step(rhs, y, h, 1e-12, 1e-12);
        if (r.err <= 1.0) {
            y = r.y5;
            x += h;
        }
        h = dp45_next_step(h, r.err);
    }
    CHECK_THAT(y.y[0], WithinRel(M_E, 1e-10));
}

TEST_CASE("radial null closed form") {
    auto a = radial_null_closed_form(1.0, 1, 2.0);
    CHECK_THAT(a.first, WithinAbs(2.0, 1e-12));
    CHECK_THAT(a.second, WithinAbs(2.0, 1e-12));
    auto b = radial_null_closed_form(1.0, -1, -2.0);
    CHECK_THAT(b.first, WithinAbs(-2.0, 1e-12));
    CHECK_THAT(b.second, WithinAbs(2.0, 1e-12));
    auto c = radial_null_closed_form(1.0, -1, -0.5);
    CHECK_THAT(c.first, WithinAbs(0.193147180559945, 1e-12));
    CHECK_THAT(c.second, WithinAbs(0.5, 1e-12));
    CHECK_THROWS_AS(radial_null_closed_form(1.0, 1, 1.0), DomainError);
    CHECK_THROWS_AS(radial_null_closed_form(1.0, 1, -1.0), DomainError);
    CHECK_THROWS_AS(radial_null_closed_form(1.0, 0, 1.0), DomainError);
}

TEST_CASE("Killing energy of static observers") {
    const ChartSpec m = make_chart("minkowski", 1.0);
    CHECK_THAT(*killing_energy(m, Point{0, 0, 0, 0}, Tangent{1, 0, 0, 0}), WithinAbs(1.0, 1e-15));
    const ChartSpec hd = make_chart("hd", 1.0);
    for (double r : {1.5, 4.0}) {
        const double f = 1.0 - 1.0 / r;
        CHECK_THAT(*killing_energy(hd, Point{0, r, 1.0, 0}, Tangent{1.0 / std::sqrt(f), 0, 0, 0}),
                   WithinRel(std::sqrt(f), 1e-14));
    }
}

TEST_CASE("exponential map of flat space is exact") {
    const ChartSpec m = make_chart("minkowski", 1.0);
    const Point p{0.1, -0.4, 2.0, 3.0};
    const Tangent x{1.5, 0.2, -0.7, 0.9};
    CHECK((exp_map(m, p, x) - (p + x.as<PointTag>())).max_abs() < 1e-12);
}

TEST_CASE("log map inverts the exponential map") {
    const ChartSpec hd = make_chart("hd", 1.0);
    const Point p{0.0, 4.0, 1.2, 0.4};
    for (const Tangent x : {Tangent{0.5, 0.3, 0.05, -0.02}, Tangent{-0.4, -0.6, 0.0, 0.1}}) {
        const Point q = exp_map(hd, p, x);
        CHECK((log_map(hd, p, q) - x).max_abs() < 1e-7);
    }
}

TEST_CASE("geodesic segments compose and reparametrise affinely") {
    const ChartSpec hd = make_chart("hd", 1.0);
    const Point p{0.0, 5.0, 1.0, 0.2};
    const Tangent x{0.6, -0.4, 0.03, 0.05};
    const GeodesicState mid = geodesic_endpoint(hd, p, x);
    const Point two_steps = exp_map(hd, mid.x, mid.v);
    const Point one_step = exp_map(hd, p, 2.0 * x);
    CHECK((two_steps - one_step).max_abs() < 1e-8);

    IntegrationConfig cfg;
    cfg.lambda_max = 0.5;
    cfg.horizon_events = false;
    const Trajectory tr = integrate(hd, GeodesicState{p, 2.0 * x, 0.0}, cfg);
    CHECK((tr.back().x - exp_map(hd, p, x)).max_abs() < 1e-8);
}

TEST_CASE("exp map reports leaving the chart") {
    const ChartSpec hd = make_chart("hd", 1.0);
    CHECK_THROWS_AS(exp_map(hd, Point{0.0, 1.5, 1.0, 0.0}, Tangent{3.0, -2.0, 0.0, 0.0}), DomainExit);
}

TEST_CASE("null vectors stay null along Kruskal geodesics") {
    const double mu = 1.0;
    const ChartSpec ks = make_chart("ks", mu);
    const Point p{0.5, 0.5, 1.2, 0.3};
    IntegrationConfig cfg;
    cfg.lambda_max = 3.0;
    const Trajectory tr = integrate(ks, GeodesicState{p, ks_null(mu, p, 0.8, 0.3, -0.2), 0.0}, cfg);
    CHECK(tr.back().lambda > 0.0);
    CHECK(tr.max_norm_drift() < 1e-9);
}

TEST_CASE("in-falling light leaves the hd chart but crosses in ks") {
    const double mu = 1.0;
    const ChartSpec hd = make_chart("hd", mu);
    const double f = 1.0 - mu / 3.0;
    const Trajectory a = integrate(hd, GeodesicState{Point{0.0, 3.0, M_PI / 2, 0.0}, Tangent{1.0 / f, -1.0, 0, 0}, 0.0},
                                   IntegrationConfig{});
    CHECK(a.termination == Termination::domain_exit);
    CHECK_FALSE(a.horizon_crossed);
    for (const auto& s : a.samples) CHECK(s.x[1] > mu);

    const ChartSpec ks = make_chart("ks", mu);
    const Trajectory b = integrate(ks, GeodesicState{Point{0.5, 0.5, M_PI / 2, 0.0}, Tangent{0, -1.0, 0, 0}, 0.0},
                                   IntegrationConfig{});
    CHECK(b.horizon_crossed);
    CHECK(b.termination == Termination::curvature_blowup);
    bool horizon_event = false;
    for (const auto& e : b.events) horizon_event |= e.kind == "horizon_crossed";
    CHECK(horizon_event);
}

TEST_CASE("null geodesics in the exterior regions fall monotonically") {
    for (Region reg : {Region::R_I_plus, Region::R_I_minus}) {
        const CaptureReport rep = capture_check(1.0, 100, 11, reg);
        INFO(rep.region << " worst rate " << rep.worst_rate);
        CHECK(rep.monotone == 100);
    }
    CHECK_THROWS_AS(capture_check(1.0, 1, 1, Region::R_II_plus), DomainError);
}

TEST_CASE("Kruskal null geodesics end only at the singularity or the budget") {
    const MaximalityReport rep = maximality_sweep(1.0, 80);
    CHECK(rep.launches == 80);
    CHECK(rep.holds());
    CHECK(rep.blowups > 0);
}

TEST_CASE("the in-going null line ends at r = 0") {
    for (double mu : {1.0, 2.5}) {
        const NoTraversalReport rep = no_traversal_demo(mu);
        CHECK(rep.equals_minus_mu);
        CHECK_FALSE(rep.entered_far_side);
        CHECK(rep.termination == "curvature_blowup");
        CHECK(rep.min_r < 1e-2 * mu);
        CHECK(rep.max_v_error < 1e-6);
    }
}

TEST_CASE("energy and norm are conserved on timelike orbits") {
    const ChartSpec hd = make_chart("hd", 1.0);
    const double r = 10.0, f = 0.9;
    const double w = 0.02;
    // unit timelike: -f t'^2 + r'^2 / f + r^2 w^2 = -1
    const double tdot = std::sqrt((1.0 + 0.01 / f + r * r * w * w) / f);
    IntegrationConfig cfg;
    cfg.lambda_max = 10.0;
    const Trajectory tr = integrate(hd, GeodesicState{Point{0, r, M_PI / 2, 0}, Tangent{tdot, 0.1, 0, w}, 0.0}, cfg);
    CHECK(tr.termination == Termination::affine_budget);
    CHECK(tr.max_energy_drift() < 1e-9);
    CHECK(tr.max_norm_drift() < 1e-9);
}

TEST_CASE("integrated radial null curves match the closed form") {
    const double mu = 1.0;
    const ChartSpec plane = make_chart("hd_plane", mu);
    struct Case {
        int eps;
        double s0, span, tol;
    };
    for (const Case c : {Case{1, 2.0, 5.0, 1e-7}, Case{-1, -0.9, 0.7, 1e-6}}) {
        const auto [t0, r0] = radial_null_closed_form(mu, c.eps, c.s0);
        IntegrationConfig cfg;
        cfg.lambda_max = c.span;
        const Tangent x{r0 / (r0 - mu), static_cast<double>(c.eps)};
        const Trajectory tr = integrate(plane, GeodesicState{Point{t0, r0}, x, 0.0}, cfg);
        CHECK(tr.termination == Termination::affine_budget);
        double worst = 0.0;
        for (const auto& s : tr.samples) {
            const auto [t, rr] = radial_null_closed_form(mu, c.eps, c.s0 + s.lambda);
            worst = std::max({worst, std::abs(s.x[0] - t), std::abs(s.x[1] - rr)});
        }
        INFO("eps=" << c.eps);
        CHECK(worst < c.tol);
    }
}

TEST_CASE("future-pointing tangents stay future-pointing") {
    const double mu = 1.0;
    const ChartSpec ks = make_chart("ks", mu);
    const Point p{1.0, -0.3, 1.0, 0.0};
    const Tangent x = ks_null(mu, p, 1.0, 0.2, 0.1);
    REQUIRE(future_pointing(ks, p, x, ks.time_reference(p)));
    IntegrationConfig cfg;
    cfg.lambda_max = 5.0;
    const Trajectory tr = integrate(ks, GeodesicState{p, x, 0.0}, cfg);
    for (const auto& s : tr.samples) CHECK(*causal_class(ks, s.x, s.v, ks.time_reference(s.x)).future_pointing);
}
