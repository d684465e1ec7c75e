#include <catch_amalgamated.hpp>

#include <cmath>

#include "hdks/hdks.hpp"

using namespace hdks;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Textbook Christoffel symbols of -f dt^2 + dr^2/f + r^2 dOmega^2, f = 1 - mu/r.
Christoffel hd_oracle(double mu, const Point& p) {
    const double r = p[1], th = p[2];
    const double f = 1.0 - mu / r, df = mu / (r * r);
    Christoffel G(4);
    auto set = [&](std::size_t k, std::size_t i, std::size_t j, double v) { G(k, i, j) = G(k, j, i) = v; };
    set(0, 0, 1, df / (2.0 * f));
    set(1, 0, 0, f * df / 2.0);
    set(1, 1, 1, -df / (2.0 * f));
    set(1, 2, 2, -r * f);
    set(1, 3, 3, -r * f * std::sin(th) * std::sin(th));
    set(2, 1, 2, 1.0 / r);
    set(2, 3, 3, -std::sin(th) * std::cos(th));
    set(3, 1, 3, 1.0 / r);
    set(3, 2, 3, std::cos(th) / std::sin(th));
    return G;
}

Point random_point(const std::string& id, double mu, Uniform01& rng) {
    const double th = rng.in(0.3, 2.8), ph = rng.in(0.0, 6.0);
    if (id == "hd") return rng.in(0, 1) < 0.5 ? Point{rng.in(-3, 3), rng.in(1.2, 10) * mu, th, ph}
                                              : Point{rng.in(-3, 3), rng.in(0.1, 0.9) * mu, th, ph};
    if (id == "schwarzschild_unimodular") return Point{rng.in(-3, 3), rng.in(0.05, 10) * mu * mu * mu, th, ph};
    if (id == "uniquely2") return Point{rng.in(-3, 3), rng.in(1.2, 10) * mu, th, ph};
    if (id == "ks") {
        double u, v;
        do {
            u = rng.in(-2, 2) * std::sqrt(mu);
            v = rng.in(-2, 2) * std::sqrt(mu);
        } while (!(u * v > -0.7 * mu));
        return Point{u, v, th, ph};
    }
    if (id == "painleve_gullstrand" || id == "eddington_derived")
        return Point{rng.in(-3, 3), rng.in(0.2, 8) * mu, th, ph};
    if (id == "er_bridge") return Point{rng.in(-3, 3), (rng.in(0, 1) < 0.5 ? -1 : 1) * rng.in(0.1, 3) * std::sqrt(mu), th, ph};
    throw std::runtime_error("no sampler for " + id);
}

double lowered(const ChartSpec& ch, const Point& p, const Riemann& R, std::size_t a, std::size_t b, std::size_t c,
               std::size_t d) {
    const Matrix g = metric_eval(ch, p);
    double s = 0.0;
    for (std::size_t e = 0; e < ch.dim; ++e) s += g(a, e) * R(e, b, c, d);
    return s;
}

}  // namespace

TEST_CASE("determinant, inverse and index of small matrices") {
    Matrix m = Matrix::diagonal({2.0, 3.0, 4.0});
    m(0, 1) = m(1, 0) = 1.0;
    const auto [det, inv] = det_and_inverse(m);
    CHECK_THAT(det, WithinRel(20.0, 1e-14));
    Matrix prod(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) prod(i, j) += m(i, k) * inv(k, j);
    CHECK((prod - Matrix::identity(3)).max_abs() < 1e-14);

    const auto ev = symmetric_eigenvalues(m);
    std::vector<double> got(ev.begin(), ev.begin() + 3);
    std::sort(got.begin(), got.end());
    // eigenvalues of [[2,1],[1,3]] are (5 -+ sqrt 5)/2, plus 4
    CHECK_THAT(got[0], WithinAbs((5.0 - std::sqrt(5.0)) / 2.0, 1e-12));
    CHECK_THAT(got[1], WithinAbs((5.0 + std::sqrt(5.0)) / 2.0, 1e-12));
    CHECK_THAT(got[2], WithinAbs(4.0, 1e-12));

    CHECK(metric_index(Matrix::diagonal({-1.0, 1.0, 1.0, 1.0})) == 1);
    CHECK(metric_index(Matrix::diagonal({-1.0, -1.0, 1.0, 1.0, 1.0, 1.0})) == 2);
}

TEST_CASE("closed-form Christoffel symbols of hd match the textbook values") {
    const double mu = 1.3;
    const ChartSpec hd = make_chart("hd", mu);
    Uniform01 rng(21);
    for (int k = 0; k < 50; ++k) {
        const Point p = random_point("hd", mu, rng);
        CHECK(max_abs_diff(christoffel(hd, p, Scheme::closed_form), hd_oracle(mu, p)) < 1e-12);
    }
}

TEST_CASE("closed-form and finite-difference Christoffel symbols agree") {
    for (const std::string id : {"hd", "schwarzschild_unimodular", "uniquely2", "ks", "painleve_gullstrand",
                                 "eddington_derived", "er_bridge"}) {
        for (double mu : {1.0, 2.5}) {
            const ChartSpec ch = make_chart(id, mu);
            REQUIRE(ch.has_closed_form());
            Uniform01 rng(100 + static_cast<std::uint64_t>(mu * 10));
            double worst = 0.0;
            for (int k = 0; k < 30; ++k) {
                const Point p = random_point(id, mu, rng);
                const Christoffel a = christoffel(ch, p, Scheme::closed_form);
                const Christoffel b = christoffel(ch, p, Scheme::finite_difference);
                worst = std::max(worst, max_abs_diff(a, b) / std::max(1.0, a.max_abs()));
            }
            INFO(id << " mu=" << mu);
            CHECK(worst < 1e-7);
        }
    }
}

TEST_CASE("vacuum charts are Ricci flat at sampled interior points") {
    for (const std::string id : {"hd", "schwarzschild_unimodular", "uniquely2", "ks", "painleve_gullstrand",
                                 "eddington_derived", "er_bridge"}) {
        const ChartSpec ch = make_chart(id, 1.0);
        Uniform01 rng(7);
        double worst = 0.0;
        for (int k = 0; k < 40; ++k) worst = std::max(worst, ricci_and_residual(ch, random_point(id, 1.0, rng)).residual);
        INFO(id);
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("shifted Euclidean space is flat") {
    const ChartSpec ch = make_chart("euclid_shifted", 1.0);
    for (double R : {1.5, 2.0, 5.0, 10.0}) CHECK(riemann_residual(ch, Point{R, 1.1, 0.3}) < 1e-5);
}

TEST_CASE("Riemann tensor symmetries") {
    const ChartSpec ch = make_chart("hd", 1.0);
    Uniform01 rng(3);
    for (int k = 0; k < 5; ++k) {
        const Point p = random_point("hd", 1.0, rng);
        const Riemann R = riemann(ch, p, Scheme::closed_form);
        double anti = 0.0, bianchi = 0.0, pair = 0.0;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b)
                for (std::size_t c = 0; c < 4; ++c)
                    for (std::size_t d = 0; d < 4; ++d) {
                        anti = std::max(anti, std::abs(R(a, b, c, d) + R(a, b, d, c)));
                        bianchi = std::max(bianchi, std::abs(R(a, b, c, d) + R(a, c, d, b) + R(a, d, b, c)));
                        pair = std::max(pair, std::abs(lowered(ch, p, R, a, b, c, d) - lowered(ch, p, R, c, d, a, b)));
                    }
        CHECK(anti < 1e-12);
        CHECK(bianchi < 1e-6);
        CHECK(pair < 1e-6);
    }
}

TEST_CASE("Kretschmann scalar of hd is 12 mu^2 / r^6") {
    const double mu = 1.0;
    const ChartSpec ch = make_chart("hd", mu);
    for (double r : {0.5, 2.0, 3.0, 7.0}) {
        const Point p{0.2, r, 1.0, 0.4};
        const Riemann R = riemann(ch, p, Scheme::closed_form);
        const Matrix g = metric_eval(ch, p);
        const Matrix gi = det_and_inverse(g).second;
        // diagonal metric: R_abcd R^abcd = sum g_aa R^a_bcd R^a_bcd g^bb g^cc g^dd
        double K = 0.0;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b)
                for (std::size_t c = 0; c < 4; ++c)
                    for (std::size_t d = 0; d < 4; ++d)
                        K += g(a, a) * R(a, b, c, d) * R(a, b, c, d) * gi(b, b) * gi(c, c) * gi(d, d);
        CHECK_THAT(K, WithinRel(12.0 * mu * mu / std::pow(r, 6), 1e-6));
    }
}

TEST_CASE("static plane curvature of the three models") {
    for (double mu : {1.0, 2.0}) {
        const StaticModel hd = hd_model(mu), u2 = uniquely2_model(mu), um = unimodular_model(mu);
        for (double h : {1.2, 2.0, 5.0, 11.0}) {
            const double x = h * mu;
            CHECK_THAT(static_plane_curvature(hd, x), WithinRel(mu / (x * x * x), 1e-12));
            CHECK_THAT(static_plane_curvature(u2, x), WithinRel(2.0 * mu / std::pow(x + mu, 3), 1e-12));
            const double hu = h * mu * mu * mu;
            CHECK_THAT(static_plane_curvature(um, hu), WithinRel(mu / (3.0 * hu + mu * mu * mu), 1e-10));
        }
    }
}

TEST_CASE("closed-form warped-product vacuum residuals vanish") {
    Uniform01 rng(5);
    for (const std::string name : {"hd", "uniquely2", "schwarzschild_unimodular"}) {
        const StaticModel m = model_by_name(name, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double h = name == "schwarzschild_unimodular" ? rng.in(0.01, 20.0) : rng.in(1.01, 20.0);
            worst = std::max(worst, warped_vacuum_residual(m, h).max());
        }
        INFO(name);
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("sectional curvature of the planes") {
    const ChartSpec hd = make_chart("hd_plane", 1.0);
    CHECK_THAT(sectional_curvature_plane(hd, Point{0.0, 2.0}), WithinAbs(0.125, 1e-14));
    CHECK_THAT(sectional_curvature_numeric(hd, Point{0.0, 2.0}), WithinAbs(0.125, 1e-7));
    CHECK_THAT(sectional_curvature_numeric(hd, Point{0.0, 0.5}), WithinAbs(8.0, 1e-5));
    const ChartSpec ks = make_chart("ks_plane", 1.0);
    const KsProfile prof(1.0);
    for (auto [u, v] : {std::pair{0.7, 0.4}, std::pair{-0.3, 0.9}, std::pair{0.0, 1.2}}) {
        const double r = prof.f_inv(u * v);
        CHECK_THAT(sectional_curvature_numeric(ks, Point{u, v}), WithinRel(1.0 / (r * r * r), 1e-6));
    }
    CHECK_THROWS_AS(sectional_curvature_plane(make_chart("hd", 1.0), Point{0.0, 2.0, 1.0, 0.0}), DomainError);
}

TEST_CASE("causal classification and time orientation") {
    const ChartSpec m = make_chart("minkowski", 1.0);
    const Point p{0, 0, 0, 0};
    const Tangent T{1, 0, 0, 0};
    CHECK(causal_class(m, p, T).kind == CausalKind::timelike);
    CHECK(causal_class(m, p, Tangent{1, 1, 0, 0}).kind == CausalKind::null);
    CHECK(causal_class(m, p, Tangent{0, 1, 0, 0}).kind == CausalKind::spacelike);
    CHECK(future_pointing(m, p, Tangent{1, 0.5, 0, 0}, T));
    CHECK_FALSE(future_pointing(m, p, Tangent{-1, 1, 0, 0}, T));
    CHECK_THROWS_AS(future_pointing(m, p, Tangent{0, 1, 0, 0}, T), NotCausal);
    CHECK_THROWS_AS(causal_class(m, p, T, Tangent{0, 1, 0, 0}), NotCausal);

    // inside the hole r is the time coordinate
    const ChartSpec hd = make_chart("hd", 1.0);
    CHECK(causal_class(hd, Point{0, 0.5, 1.0, 0}, Tangent{1, 0, 0, 0}).kind == CausalKind::spacelike);
    CHECK(causal_class(hd, Point{0, 0.5, 1.0, 0}, Tangent{0, 1, 0, 0}).kind == CausalKind::timelike);
}

TEST_CASE("domain and degeneracy errors") {
    const ChartSpec hd = make_chart("hd", 1.0);
    CHECK_THROWS_AS(metric_eval(hd, Point{0, 1.0, 1.0, 0}), DomainError);
    CHECK_THROWS_AS(christoffel(hd, Point{0, -1.0, 1.0, 0}, Scheme::closed_form), DomainError);
    // the bridge metric degenerates as u -> 0
    const ChartSpec er = make_chart("er_bridge", 1.0);
    CHECK_THROWS_AS(christoffel(er, Point{0, 1e-7, 1.0, 0}, Scheme::finite_difference), SingularMetric);
    CHECK_THROWS_AS(make_chart("nope", 1.0), DomainError);
}
