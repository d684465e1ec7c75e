#include <catch_amalgamated.hpp>

#include <cmath>

#include "hdks/hdks.hpp"

using namespace hdks;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Composite Simpson rule, used as an independent check on the adaptive one.
template <class F>
double simpson(const F& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("adaptive Gauss-Kronrod on known integrals") {
    CHECK_THAT(integrate_gk([](double x) { return std::sin(x); }, 0.0, M_PI).value, WithinAbs(2.0, 1e-12));
    CHECK_THAT(integrate_gk([](double x) { return std::exp(x); }, 0.0, 1.0).value, WithinAbs(M_E - 1.0, 1e-12));
    CHECK_THAT(integrate_gk([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-9).value, WithinAbs(2.0, 1e-8));
    CHECK_THAT(integrate_gk([](double x) { return x * x; }, 2.0, 0.0).value, WithinAbs(-8.0 / 3.0, 1e-12));
    CHECK(integrate_gk([](double x) { return x; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("integrand values at reference radii") {
    CHECK_THAT(w_integrand(1.0, WKind::kasner, 0.0), WithinAbs(1.118033988749895, 1e-14));
    CHECK_THAT(w_integrand(1.0, WKind::fronsdal, 1.0), WithinAbs(std::sqrt(3.0), 1e-14));
    CHECK_THAT(w_integrand(1.0, WKind::fronsdal_paper, 1.0), WithinAbs(2.0, 1e-14));
    CHECK_THROWS_AS(w_integrand(1.0, WKind::fronsdal, 0.0), DomainError);
}

TEST_CASE("W integrals agree with Simpson's rule") {
    for (double mu : {1.0, 2.0}) {
        for (double x : {0.5, 2.0, 6.0}) {
            const double X = x * mu;
            auto wk = [mu](double h) { return w_integrand(mu, WKind::kasner, h); };
            CHECK_THAT(w_integral(mu, WKind::kasner, X, 0.0), WithinAbs(simpson(wk, 0.0, X), 1e-10));
            auto wf = [mu](double h) { return w_integrand(mu, WKind::fronsdal, h); };
            CHECK_THAT(w_integral(mu, WKind::fronsdal, X, mu), WithinAbs(simpson(wf, mu, X), 1e-10));
        }
    }
    CHECK_THROWS_AS(w_integral(1.0, WKind::fronsdal, 0.0, 1.0), DomainError);
}

TEST_CASE("Fronsdal map is an isometric imbedding on both sides of the horizon") {
    for (double mu : {1.0, 2.0}) {
        for (FronsdalBranch br : {FronsdalBranch::exterior, FronsdalBranch::interior}) {
            const EmbeddingMap m = fronsdal_map(mu, br);
            const std::vector<double> radii = br == FronsdalBranch::exterior ? std::vector<double>{1.1, 1.5, 3.0, 8.0}
                                                                            : std::vector<double>{0.1, 0.4, 0.7, 0.95};
            double worst = 0.0;
            for (double t = -5.0; t <= 5.0; t += 1.25)
                for (double h : radii) worst = std::max(worst, pullback_residual(m, Point{t * mu, h * mu, 1.1, 0.4}));
            INFO("mu=" << mu << " " << to_string(br));
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("Fronsdal points satisfy the hypersurface equations") {
    Uniform01 rng(13);
    for (int k = 0; k < 100; ++k) {
        const double mu = rng.in(0.5, 2.0);
        const bool ext = k % 2 == 0;
        const double r = ext ? rng.in(1.01, 6.0) * mu : rng.in(0.05, 0.99) * mu;
        const Point q = fronsdal_embed(mu, ext ? FronsdalBranch::exterior : FronsdalBranch::interior, rng.in(-5, 5),
                                       r, rng.in(0.1, 3.0), rng.in(0.0, 6.2));
        CHECK(fronsdal_constraints(mu, q).max() < 1e-9 * std::max(1.0, q.max_abs()));
    }
}

TEST_CASE("mirror negates the first two ambient coordinates and preserves the imbedding") {
    const double mu = 1.0;
    for (FronsdalBranch br : {FronsdalBranch::exterior, FronsdalBranch::interior}) {
        const double r = br == FronsdalBranch::exterior ? 2.0 : 0.5;
        const Point q = fronsdal_embed(mu, br, 0.7, r, 1.0, 0.3);
        const Point qm = fronsdal_embed(mu, br, 0.7, r, 1.0, 0.3, true);
        CHECK((fronsdal_mirror(q) - qm).max_abs() == 0.0);
        CHECK(fronsdal_constraints(mu, qm).max() < 1e-9);
        CHECK(pullback_residual(fronsdal_map(mu, br, true), Point{0.7, r, 1.0, 0.3}) < 1e-6);
    }
}

TEST_CASE("the printed integrand overshoots g_rr by exactly one") {
    const double mu = 1.0;
    const EmbeddingMap m = fronsdal_map(mu, FronsdalBranch::exterior, false, WKind::fronsdal_paper);
    for (double r : {1.5, 3.0, 6.0}) {
        const PullbackResult pb = pullback(m, Point{0.3, r, 1.0, 0.2});
        CHECK_THAT(pb.difference(1, 1), WithinAbs(1.0, 1e-7));
        CHECK_THAT(pb.absolute, WithinAbs(1.0, 1e-7));
    }
}

TEST_CASE("sphere metrics on the two horizons differ by mu^2") {
    for (double mu : {1.0, 2.0}) {
        const HomothetyReport rep = horizon_homothety_check(mu, 200);
        CHECK(rep.ks.samples > 150);
        CHECK(rep.ks.worst_deviation(mu * mu) < 1e-8);
        CHECK(rep.fronsdal.worst_deviation(mu * mu) < 1e-8);
    }
}

TEST_CASE("Kasner map is periodic in t") {
    Uniform01 rng(2);
    for (int k = 0; k < 50; ++k)
        CHECK(kasner_periodicity_error(1.0, rng.in(-10, 10), rng.in(0.1, 5.0), rng.in(0.1, 3.0), rng.in(0, 6)) < 1e-12);
}

TEST_CASE("ambient spaces have the expected index") {
    CHECK(AmbientFlat6::kasner().index() == 2);
    CHECK(AmbientFlat6::fronsdal().index() == 1);
    CHECK(AmbientFlat6::kasner_conditions().index() == 1);
}

TEST_CASE("metric induced by the Kasner map") {
    const double mu = 1.0;
    const EmbeddingMap two = kasner_map(mu, AmbientFlat6::kasner(), KasnerTarget::printed);
    const EmbeddingMap cond = kasner_map(mu, AmbientFlat6::kasner_conditions(), KasnerTarget::printed);
    for (double H : {0.5, 1.0, 2.0, 4.0}) {
        const Point p{0.4, H, 1.0, 0.3};
        const double F2 = H * H / (H * H + 4.0 * mu * mu);
        const double s2 = std::sin(1.0) * std::sin(1.0);
        auto induced = [&](const EmbeddingMap& m) { return pullback(m, p).difference + m.chart_metric(p); };
        const Matrix a = induced(two), b = induced(cond);
        const Matrix oa = Matrix::diagonal({-F2, 2.0, H * H, H * H * s2});
        const Matrix ob = Matrix::diagonal({F2, 0.0, H * H, H * H * s2});
        INFO("H=" << H);
        CHECK((a - oa).max_abs() < 1e-7);
        CHECK((b - ob).max_abs() < 1e-7);
    }
}
