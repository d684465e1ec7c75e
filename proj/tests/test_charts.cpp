#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/lambert_w.hpp>
#include <cmath>

#include "hdks/hdks.hpp"

using namespace hdks;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent inverse of (r - mu) e^{r/mu} = w through the principal Lambert W.
double lambert_f_inv(double mu, double w) { return mu * (1.0 + boost::math::lambert_w0(w / (mu * M_E))); }

const Region kBranches[] = {Region::R_II_plus, Region::R_II_minus, Region::R_I_plus, Region::R_I_minus};

bool outer(Region r) { return r == Region::R_II_plus || r == Region::R_II_minus; }

}  // namespace

TEST_CASE("f_inv agrees with the Lambert W inverse") {
    for (double mu : {0.5, 1.0, 3.0}) {
        const KsProfile prof(mu);
        for (double s : {-0.999999, -0.9, -0.5, -1e-6, 1e-6, 0.3, 1.0, 10.0, 1e3, 1e6}) {
            const double w = s * mu;
            const double r = prof.f_inv(w);
            // relative condition number of w -> r; large next to w = -mu
            const double kappa = std::abs(w) / (r * prof.df(r));
            INFO("mu=" << mu << " w=" << w << " kappa=" << kappa);
            CHECK_THAT(r, WithinRel(lambert_f_inv(mu, w), 1e-12 * std::max(1.0, kappa)));
            CHECK(std::abs(prof.f(r) - w) <= 1e-14 * std::max(std::abs(w), mu) * std::max(1.0, r / mu));
        }
        CHECK(prof.f_inv(0.0) == mu);
        CHECK_THROWS_AS(prof.f_inv(-mu), DomainError);
        CHECK_THROWS_AS(prof.f_inv(-2.0 * mu), DomainError);
    }
}

TEST_CASE("hd_to_ks on the exterior branch at the bifurcation time") {
    auto [u, v] = hd_to_ks(1.0, Region::R_II_plus, 0.0, 2.0);
    CHECK_THAT(u, WithinAbs(M_E, 1e-12));
    CHECK_THAT(v, WithinAbs(M_E, 1e-12));
    auto [u2, v2] = hd_to_ks(1.0, Region::R_II_minus, 0.0, 2.0);
    CHECK_THAT(u2, WithinAbs(-M_E, 1e-12));
    CHECK_THAT(v2, WithinAbs(-M_E, 1e-12));
    auto [u3, v3] = hd_to_ks(1.0, Region::R_I_plus, 0.0, 0.5);
    CHECK_THAT(u3, WithinAbs(std::sqrt(0.5) * std::exp(0.25), 1e-12));
    CHECK_THAT(v3, WithinAbs(-std::sqrt(0.5) * std::exp(0.25), 1e-12));
}

TEST_CASE("hd and ks transitions round trip and satisfy uv = f(r)") {
    Uniform01 rng(17);
    for (double mu : {1.0, 2.0}) {
        const KsProfile prof(mu);
        for (Region reg : kBranches) {
            for (int k = 0; k < 200; ++k) {
                const double t = rng.in(-5.0, 5.0) * mu;
                const double r = outer(reg) ? rng.in(1.01, 5.0) * mu : rng.in(0.05, 0.99) * mu;
                const auto [u, v] = hd_to_ks(mu, reg, t, r);
                CHECK(std::abs(u * v - prof.f(r)) <= 1e-10 * std::max(1.0, std::abs(prof.f(r))));
                const HdCoords back = ks_to_hd(mu, u, v);
                CHECK(back.region == reg);
                CHECK(std::abs(back.t - t) < 1e-9 * std::max(1.0, std::abs(t)));
                CHECK(std::abs(back.r - r) < 1e-9 * std::max(1.0, r));
            }
        }
    }
}

TEST_CASE("each Kruskal branch pulls the ks metric back to hd") {
    for (double mu : {1.0, 2.0}) {
        const ChartSpec hd = make_chart("hd", mu), ks = make_chart("ks", mu);
        for (Region reg : kBranches) {
            const TransitionMap tm = make_transition("hd", "ks", to_string(reg), mu);
            for (double t : {-2.0, 0.0, 1.5})
                for (double h : outer(reg) ? std::vector<double>{1.3, 2.0, 4.0} : std::vector<double>{0.2, 0.5, 0.8}) {
                    const Point p{t * mu, h * mu, 1.1, 0.3};
                    INFO(to_string(reg) << " t=" << t << " r=" << h);
                    CHECK(transition_pullback_residual(tm, hd, ks, p) < 1e-8);
                }
        }
    }
}

TEST_CASE("horizon and domain errors of the Kruskal transition") {
    CHECK_THROWS_AS(ks_to_hd(1.0, 0.0, 2.0), HorizonPoint);
    CHECK_THROWS_AS(ks_to_hd(1.0, 1e-14, 1.0), HorizonPoint);
    CHECK_THROWS_AS(ks_to_hd(1.0, 2.0, -1.0), DomainError);
    CHECK_THROWS_AS(hd_to_ks(1.0, Region::R_II_plus, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(hd_to_ks(1.0, Region::R_II_plus, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(hd_to_ks(1.0, Region::R_I_plus, 0.0, 2.0), DomainError);
    CHECK_THROWS_AS(hd_to_ks(1.0, Region::Horizon, 0.0, 2.0), DomainError);
    CHECK(classify_region(1.0, 0.0, 3.0) == Region::Horizon);
}

TEST_CASE("unimodular radius and pullback") {
    for (double mu : {1.0, 2.0}) {
        for (double h : {0.1, 1.0, 7.0}) CHECK_THAT(std::pow(unimodular_transition(mu, h), 3), WithinRel(3 * h + mu * mu * mu, 1e-13));
        CHECK_THAT(unimodular_inverse(mu, unimodular_transition(mu, 2.5)), WithinRel(2.5, 1e-12));
        CHECK_THROWS_AS(unimodular_transition(mu, 0.0), DomainError);
        const TransitionMap tm = make_transition("schwarzschild_unimodular", "hd", "", mu);
        const ChartSpec src = make_chart("schwarzschild_unimodular", mu), tgt = make_chart("hd", mu);
        for (double h : {0.2, 1.0, 5.0}) CHECK(transition_pullback_residual(tm, src, tgt, Point{0.4, h, 1.0, 0.2}) < 1e-8);
    }
}

TEST_CASE("historical charts that are exact pullbacks") {
    const double mu = 1.0;
    const ChartSpec hd = make_chart("hd", mu);
    for (const std::string id : {"painleve_gullstrand", "eddington_derived"}) {
        const TransitionMap tm = make_transition("hd", id, "", mu);
        const ChartSpec tgt = make_chart(id, mu);
        for (double r : {0.3, 0.7, 1.5, 3.0}) {
            INFO(id << " r=" << r);
            CHECK(transition_pullback_residual(tm, hd, tgt, Point{0.5, r, 1.0, 0.2}) < 1e-8);
        }
    }
    const TransitionMap kx = make_transition("hd", "kruskal_xy", "", mu);
    const ChartSpec derived = make_kruskal_xy_chart(mu, KruskalXyProfile::derived);
    for (double r : {1.2, 2.0, 4.0}) CHECK(transition_pullback_residual(kx, hd, derived, Point{0.3, r, 1.0, 0.2}) < 1e-8);
    for (const std::string branch : {"N1", "N2"}) {
        const TransitionMap er = make_transition("er_bridge", "hd", branch, mu);
        const ChartSpec src = make_chart("er_bridge", mu);
        const double s = branch == "N1" ? 1.0 : -1.0;
        for (double u : {0.2, 1.0, 2.0}) CHECK(transition_pullback_residual(er, src, hd, Point{0.1, s * u, 1.0, 0.2}) < 1e-8);
    }
}

TEST_CASE("printed Eddington cross term fails to pull back by a known amount") {
    const double mu = 1.0;
    const ChartSpec hd = make_chart("hd", mu), tgt = make_chart("eddington_paper", mu);
    const TransitionMap tm = make_transition("hd", "eddington_paper", "", mu);
    for (double r : {0.5, 1.5, 3.0, 6.0}) {
        // flipping the cross sign shifts g_tr by 2 mu/r and g_rr by 4 mu^2 / (r |r - mu|)
        const double oracle = std::max(2.0 * mu / r, 4.0 * mu * mu / (r * std::abs(r - mu)));
        CHECK_THAT(transition_pullback_residual(tm, hd, tgt, Point{0.2, r, 1.0, 0.3}), WithinRel(oracle, 1e-6));
    }
}

TEST_CASE("Lemaitre has no closed-form transition") {
    CHECK_THROWS_AS(historical_transform(Historical::lemaitre, 1.0, 0.0, 2.0), NoClosedForm);
    CHECK_THROWS_AS(historical_inverse(Historical::lemaitre, 1.0, 0.0, 2.0), NoClosedForm);
    CHECK_THROWS_AS(make_transition("hd", "lemaitre_paper", "", 1.0), DomainError);
}

TEST_CASE("Kruskal xy transform inverts") {
    for (double r : {1.1, 2.0, 5.0})
        for (double t : {-1.0, 0.0, 2.0}) {
            const auto [x, y] = historical_transform(Historical::kruskal_xy, 1.0, t, r);
            const auto [t2, r2] = historical_inverse(Historical::kruskal_xy, 1.0, x, y);
            CHECK_THAT(t2, WithinAbs(t, 1e-10));
            CHECK_THAT(r2, WithinRel(r, 1e-10));
        }
    CHECK_THROWS_AS(historical_transform(Historical::kruskal_xy, 1.0, 0.0, 0.5), DomainError);
}

TEST_CASE("Kruskal plane curvature equals the HD plane curvature") {
    for (double mu : {1.0, 2.0}) {
        const KsProfile prof(mu);
        Uniform01 rng(29);
        for (int k = 0; k < 100; ++k) {
            const double r = rng.in(0.05, 6.0) * mu;
            if (std::abs(r - mu) < 1e-3 * mu) continue;
            const double a = std::sqrt(std::abs(prof.f(r)));
            const double u = a * std::exp(rng.in(-1.0, 1.0));
            const double v = (r > mu ? 1.0 : -1.0) * a * a / u;
            CHECK_THAT(ks_sectional(prof, u, v), WithinRel(mu / (r * r * r), 1e-9));
        }
        // across the horizon itself
        CHECK_THAT(ks_sectional(prof, 0.0, 1.7), WithinRel(1.0 / (mu * mu), 1e-12));
    }
}

TEST_CASE("Kruskal Killing field is the image of the static time field") {
    const double mu = 1.0;
    const ChartSpec ks = make_chart("ks", mu);
    for (Region reg : kBranches) {
        const TransitionMap tm = make_transition("hd", "ks", to_string(reg), mu);
        const Point p{0.4, outer(reg) ? 2.5 : 0.4, 1.0, 0.2};
        const Tangent pushed = push_forward(tm, p, Tangent{1.0, 0.0, 0.0, 0.0});
        const auto K = ks.killing_field(tm.forward(p));
        REQUIRE(K);
        CHECK((pushed - *K).max_abs() < 1e-8 * std::max(1.0, K->max_abs()));
    }
    CHECK_FALSE(ks.killing_field(Point{0.0, 1.0, 1.0, 0.0}));
}

TEST_CASE("time orientation is consistent across the Kruskal transition") {
    const double mu = 1.0;
    const ChartSpec hd = make_chart("hd", mu), ks = make_chart("ks", mu);
    for (Region reg : {Region::R_II_plus, Region::R_I_plus}) {
        const TransitionMap tm = make_transition("hd", "ks", to_string(reg), mu);
        const Point p{0.3, reg == Region::R_II_plus ? 3.0 : 0.5, 1.0, 0.2};
        const Tangent T = hd.time_reference(p);
        const Tangent image = push_forward(tm, p, T);
        CHECK(future_pointing(ks, tm.forward(p), image, ks.time_reference(tm.forward(p))));
    }
}
