#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hdks/chart.hpp"
#include "hdks/charts.hpp"
#include "hdks/errors.hpp"
#include "hdks/geodesics.hpp"
#include "hdks/linalg.hpp"

namespace hdks {

// ---- gluing structures -------------------------------------------------

struct SampledRegion {
    std::string name;
    std::size_t dim = 1;
    std::function<bool(const Point&)> contains;
    // Connected-piece label of a point of the region.
    std::function<int(const Point&)> component = [](const Point&) { return 0; };
    // Points of the region used to seed searches and build the region graph.
    std::function<std::vector<Point>(Uniform01&, std::size_t)> sample;
};

// (M, N, U, V, xi): U open in M, V open in N, xi: U -> V a homeomorphism.
struct GluingStructure {
    std::string name;
    SampledRegion M, N;
    std::function<bool(const Point&)> in_U;
    std::function<bool(const Point&)> in_V;
    std::function<Point(const Point&)> xi;
    std::function<Point(const Point&)> xi_inv;
};

struct HausdorffSearchConfig {
    std::size_t sequences = 10000;
    double ratio = 0.5;          // geometric decay of the approach sequences
    std::size_t terms = 40;
    double resolution = 1e-4;    // convergence threshold on the tail
    double match_tol = 1e-6;     // witness matching tolerance
    std::uint64_t seed = 1;
};

struct HausdorffWitness {
    Point p;  // limit in M - U
    Point q;  // limit of xi(p_n) in N - V
    std::vector<double> radii_checked;
};

namespace detail {

// Aitken delta-squared estimate of the limit from the last three terms,
// componentwise, falling back to the last term where the denominator vanishes.
inline Point aitken_limit(const std::vector<Point>& seq) {
    const std::size_t n = seq.size();
    Point out = seq.back();
    if (n < 3) return out;
    const Point& a = seq[n - 3];
    const Point& b = seq[n - 2];
    const Point& c = seq[n - 1];
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double den = (c[i] - b[i]) - (b[i] - a[i]);
        if (std::abs(den) > 1e-300) out[i] = c[i] - (c[i] - b[i]) * (c[i] - b[i]) / den;
    }
    return out;
}

inline bool tail_converged(const std::vector<Point>& seq, double resolution) {
    if (seq.size() < 3) return false;
    const Point d = seq.back() - seq[seq.size() - 2];
    return d.max_abs() <= resolution * std::max(1.0, seq.back().max_abs());
}

// Walk from p0 (in U) along dir until leaving U inside M; return a pair
// (inside, outside) straddling the exit, or nothing if U extends past the cap.
inline std::optional<std::pair<Point, Point>> find_exit(const GluingStructure& G, const Point& p0,
                                                        const Point& dir) {
    double lo = 0.0, hi = 1e-3;
    auto at = [&](double s) { return p0 + s * dir; };
    while (hi < 1e3) {
        const Point x = at(hi);
        if (!G.M.contains(x) || !G.in_U(x)) break;
        lo = hi;
        hi *= 2.0;
    }
    if (hi >= 1e3) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const Point x = at(mid);
        if (G.M.contains(x) && G.in_U(x)) lo = mid; else hi = mid;
    }
    return std::make_pair(at(lo), at(hi));
}

}  // namespace detail

// Searches sampled sequences p_n in U converging to p in M - U whose images
// xi(p_n) converge to q in N - V. A hit is a certified non-Hausdorff pair at
// the sampled resolution; no hit is not a proof of the Hausdorff property.
inline std::optional<HausdorffWitness> hausdorff_witness(const GluingStructure& G,
                                                         const HausdorffSearchConfig& cfg = {}) {
    Uniform01 rng(cfg.seed);
    const std::vector<Point> seeds = G.M.sample(rng, cfg.sequences);
    for (const Point& p0 : seeds) {
        if (!G.in_U(p0)) continue;
        Point dir(p0.size());
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = rng.in(-1.0, 1.0);
        if (dir.max_abs() == 0.0) continue;
        const auto exit = detail::find_exit(G, p0, dir);
        if (!exit) continue;
        const Point& b = exit->second;  // first point found outside U
        // p_n = b + ratio^n (p0 - b), kept only while inside U
        std::vector<Point> ps, qs;
        double w = 1.0;
        for (std::size_t n = 0; n < cfg.terms; ++n, w *= cfg.ratio) {
            const Point pn = b + w * (p0 - b);
            if (!G.M.contains(pn) || !G.in_U(pn)) break;
            ps.push_back(pn);
            qs.push_back(G.xi(pn));
        }
        if (ps.size() < 3 || !detail::tail_converged(ps, cfg.resolution) ||
            !detail::tail_converged(qs, cfg.resolution))
            continue;
        const Point p = detail::aitken_limit(ps);
        const Point q = detail::aitken_limit(qs);
        if (!G.M.contains(p) || G.in_U(p)) continue;
        if (!G.N.contains(q) || G.in_V(q)) continue;
        // soundness: neighbourhoods of p and q hold identified sample pairs
        HausdorffWitness wit{p, q, {}};
        bool sound = true;
        for (double delta : {1e-2, 1e-3, 1e-4}) {
            bool hit = false;
            for (std::size_t n = 0; n < ps.size() && !hit; ++n)
                hit = (ps[n] - p).max_abs() < delta && (qs[n] - q).max_abs() < delta &&
                      (G.xi(ps[n]) - qs[n]).max_abs() <= cfg.match_tol;
            if (!hit) { sound = false; break; }
            wit.radii_checked.push_back(delta);
        }
        if (sound) return wit;
    }
    return std::nullopt;
}

// Quotient of two sampled regions under xi, realised as a union-find over the
// connected pieces of each side.
class GluedSpace {
public:
    GluedSpace(GluingStructure g, std::size_t samples, std::uint64_t seed = 3) : g_(std::move(g)) {
        Uniform01 rng(seed);
        for (const Point& x : g_.M.sample(rng, samples)) node_of(0, x);
        for (const Point& y : g_.N.sample(rng, samples)) node_of(1, y);
        for (const Point& x : g_.M.sample(rng, samples)) {
            if (!g_.in_U(x)) continue;
            unite(node_of(0, x), node_of(1, g_.xi(x)));
            identified_.push_back(x);
        }
    }

    const GluingStructure& structure() const { return g_; }

    // Representative node of a point on side 0 (M) or 1 (N).
    std::size_t node(int side, const Point& x) const {
        const auto key = std::make_pair(side, side == 0 ? g_.M.component(x) : g_.N.component(x));
        const auto it = index_.find(key);
        if (it == index_.end()) throw DomainError("GluedSpace: point lies in no sampled region");
        return find(it->second);
    }

    std::size_t region_count() const {
        std::set<std::size_t> roots;
        for (std::size_t i = 0; i < parent_.size(); ++i) roots.insert(find(i));
        return roots.size();
    }

    const std::vector<Point>& identified_samples() const { return identified_; }

    // Every identified sample and its image land in the same node.
    bool quotient_consistent() const {
        for (const Point& x : identified_)
            if (node(0, x) != node(1, g_.xi(x))) return false;
        return true;
    }

private:
    std::size_t node_of(int side, const Point& x) {
        const auto key = std::make_pair(side, side == 0 ? g_.M.component(x) : g_.N.component(x));
        const auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        const std::size_t id = parent_.size();
        parent_.push_back(id);
        index_.emplace(key, id);
        return id;
    }
    std::size_t find(std::size_t i) const {
        while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

    GluingStructure g_;
    std::map<std::pair<int, int>, std::size_t> index_;
    mutable std::vector<std::size_t> parent_;
    std::vector<Point> identified_;
};

// ---- fixtures --------------------------------------------------------------

inline SampledRegion real_line(const std::string& name, double lo = -10.0, double hi = 10.0) {
    SampledRegion r;
    r.name = name;
    r.dim = 1;
    r.contains = [](const Point& p) { return std::isfinite(p[0]); };
    r.sample = [lo, hi](Uniform01& rng, std::size_t n) {
        std::vector<Point> v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(Point{rng.in(lo, hi)});
        return v;
    };
    return r;
}

// Two real lines glued along the positive half-line by the identity: the
// line with a doubled origin.
inline GluingStructure doubled_origin_line() {
    GluingStructure g;
    g.name = "doubled_origin";
    g.M = real_line("M");
    g.N = real_line("N");
    g.in_U = [](const Point& p) { return p[0] > 0.0; };
    g.in_V = [](const Point& p) { return p[0] > 0.0; };
    g.xi = [](const Point& p) { return p; };
    g.xi_inv = [](const Point& p) { return p; };
    return g;
}

// Total identification U = M.
inline GluingStructure identity_gluing() {
    GluingStructure g = doubled_origin_line();
    g.name = "total_identification";
    g.in_U = [](const Point&) { return true; };
    g.in_V = [](const Point&) { return true; };
    return g;
}

// ---- Einstein-Rosen bridge -------------------------------------------------

struct ErGluedSpace {
    double mu = 1.0;
    GluedSpace space;
    // Metric on each side in (t, u, theta, phi), valid up to and including u = 0.
    std::function<Matrix(const Point&)> metric_N1;
    std::function<Matrix(const Point&)> metric_N2;
};

inline Matrix er_metric_raw(double mu, const Point& p, bool printed) {
    const ErComponents e = er_bridge_components(mu, p[1], printed);
    const double s = std::sin(p[2]);
    return Matrix::diagonal({e.g_tt, e.g_uu, e.sphere, e.sphere * s * s});
}

// G = (N1, N2, B, B, id): the u >= 0 and u <= 0 sheets of the (t, u) plane
// glued along the bridge u = 0.
inline GluingStructure er_gluing() {
    GluingStructure g;
    g.name = "er_bridge";
    auto sheet = [](const std::string& name, double sign) {
        SampledRegion r;
        r.name = name;
        r.dim = 2;
        r.contains = [sign](const Point& p) { return std::isfinite(p[0]) && sign * p[1] >= 0.0; };
        r.sample = [sign](Uniform01& rng, std::size_t n) {
            std::vector<Point> v;
            for (std::size_t i = 0; i < n; ++i) {
                // a quarter of the samples sit on the bridge itself
                const double u = (i % 4 == 0) ? 0.0 : sign * rng.in(0.0, 5.0);
                v.push_back(Point{rng.in(-10.0, 10.0), u});
            }
            return v;
        };
        return r;
    };
    g.M = sheet("N1", 1.0);
    g.N = sheet("N2", -1.0);
    g.in_U = [](const Point& p) { return p[1] == 0.0; };
    g.in_V = [](const Point& p) { return p[1] == 0.0; };
    g.xi = [](const Point& p) { return p; };
    g.xi_inv = [](const Point& p) { return p; };
    return g;
}

inline ErGluedSpace er_bridge(double mu, std::size_t samples = 1000) {
    if (!(mu > 0.0)) throw DomainError("er_bridge: mu must be positive");
    ErGluedSpace s{mu, GluedSpace(er_gluing(), samples), {}, {}};
    s.metric_N1 = [mu](const Point& p) { return er_metric_raw(mu, p, false); };
    s.metric_N2 = s.metric_N1;
    return s;
}

// Largest componentwise jump of the metric across u = 0, approached from
// both sheets at the given offsets.
inline double er_metric_jump(double mu, bool printed, double t = 0.0, double theta = 1.0) {
    double worst = 0.0;
    for (double eps : {1e-3, 1e-6, 1e-9, 0.0}) {
        const Matrix a = er_metric_raw(mu, Point{t, eps, theta, 0.0}, printed);
        const Matrix b = er_metric_raw(mu, Point{t, -eps, theta, 0.0}, printed);
        worst = std::max(worst, (a - b).max_abs());
    }
    return worst;
}

// Induced sphere metric on the bridge divided by the unit-sphere metric, as
// a homothety coefficient (square root of the length ratio).
inline double bridge_homothety(double mu, bool printed = false, std::size_t samples = 64, std::uint64_t seed = 11) {
    if (!(mu > 0.0)) throw DomainError("bridge_homothety: mu must be positive");
    Uniform01 rng(seed);
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double th = rng.in(0.1, M_PI - 0.1);
        const Point p{rng.in(-5.0, 5.0), 0.0, th, rng.in(0.0, 2.0 * M_PI)};
        const double a = rng.in(-1.0, 1.0), b = rng.in(-1.0, 1.0);
        const Tangent x{0.0, 0.0, a, b};
        const double unit = a * a + std::sin(th) * std::sin(th) * b * b;
        if (unit < 1e-6) continue;
        acc += er_metric_raw(mu, p, printed).quadratic(x, x) / unit;
        ++n;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// ---- connectivity ----------------------------------------------------------

enum class Space { schwarzschild, hd, ks, er };

inline const char* to_string(Space s) {
    switch (s) {
        case Space::schwarzschild: return "schwarzschild";
        case Space::hd: return "hd";
        case Space::ks: return "ks";
        case Space::er: return "er";
    }
    return "?";
}

inline Space space_from_string(const std::string& s) {
    if (s == "schwarzschild") return Space::schwarzschild;
    if (s == "hd") return Space::hd;
    if (s == "ks") return Space::ks;
    if (s == "er") return Space::er;
    throw DomainError("unknown space: " + s);
}

// Charts making up each space's atlas.
inline std::vector<std::string> atlas_of(Space s) {
    switch (s) {
        case Space::schwarzschild: return {"schwarzschild_unimodular"};
        case Space::hd: return {"hd"};
        case Space::ks: return {"ks"};
        case Space::er: return {"er_bridge"};
    }
    return {};
}

struct Segment {
    std::string chart;
    Point start;
    Tangent velocity;
    Point end;
};

struct AtlasCertificate {
    bool horizon_excluded = false;   // every chart rejects every sampled r = mu point
    bool components_split = false;   // p and q carry different component labels in every chart
    std::size_t charts_checked = 0;
    std::size_t points_checked = 0;
    bool holds() const { return horizon_excluded && components_split; }
};

struct ConnectivityConfig {
    double cell = 0.25;        // lattice spacing, units of mu
    double margin = 1.0;       // bounding-box margin, units of mu
    double min_boundary = 0.02;
    std::size_t budget = 20000;  // geodesic hops attempted
};

struct ConnectivityResult {
    Space space = Space::hd;
    bool found = false;
    bool budget_exhausted = false;
    std::vector<Segment> path;
    std::size_t hops_tried = 0;
    std::size_t cells_reached = 0;
    double resolution = 0.0;
    std::optional<AtlasCertificate> certificate;
    std::optional<std::size_t> glued_regions;  // ER only: components of the glued quotient
};

// Point of a space's atlas chart from HD-style data: (t, r) for hd and
// schwarzschild (r is the unimodular h there), KS coordinates of the HD point
// (t, r) in `region` for ks, (t, u) for er. Angles theta = pi/2, phi = 0.
inline Point space_point(Space s, double mu, double t, double r, Region region = Region::R_II_plus) {
    switch (s) {
        case Space::ks: {
            const auto [u, v] = hd_to_ks(mu, region, t, r);
            return Point{u, v, M_PI / 2, 0.0};
        }
        default: return Point{t, r, M_PI / 2, 0.0};
    }
}

// Decidable check over the HD atlas: no chart contains a point with r = mu,
// and the two query points sit in different components of every chart.
inline AtlasCertificate hd_atlas_certificate(double mu, const Point& p, const Point& q) {
    AtlasCertificate c;
    c.horizon_excluded = true;
    c.components_split = true;
    for (const auto& id : atlas_of(Space::hd)) {
        const ChartSpec ch = make_chart(id, mu);
        ++c.charts_checked;
        for (int i = -20; i <= 20; ++i)
            for (double th : {0.3, M_PI / 2, 2.8}) {
                ++c.points_checked;
                if (ch.domain(Point{0.5 * i * mu, mu, th, 0.1 * i})) c.horizon_excluded = false;
            }
        if (ch.component_of(p) == ch.component_of(q)) c.components_split = false;
    }
    return c;
}

namespace detail {

struct CellKey {
    long i, j;
    bool operator<(const CellKey& o) const { return i != o.i ? i < o.i : j < o.j; }
};

}  // namespace detail

// Breadth-first search over short geodesic hops in the (first two)
// coordinates of the space's chart. Each hop is exp_map from the current node
// towards the centre of a neighbouring lattice cell; the final hop to q is
// solved by shooting. Returned paths are re-integrated segment by segment.
inline ConnectivityResult connectivity(Space space, double mu, const Point& p, const Point& q,
                                       const ConnectivityConfig& cfg = {}) {
    ConnectivityResult res;
    res.space = space;
    res.resolution = cfg.cell * mu;
    const std::string id = atlas_of(space).front();
    const ChartSpec ch = make_chart(id, mu);
    require_domain(ch, p);
    require_domain(ch, q);
    if (space == Space::hd) res.certificate = hd_atlas_certificate(mu, p, q);
    if (space == Space::er) res.glued_regions = er_bridge(mu, 200).space.region_count();

    const double d = cfg.cell * mu;
    const double lo0 = std::min(p[0], q[0]) - cfg.margin * mu, hi0 = std::max(p[0], q[0]) + cfg.margin * mu;
    const double lo1 = std::min(p[1], q[1]) - cfg.margin * mu, hi1 = std::max(p[1], q[1]) + cfg.margin * mu;
    auto cell_of = [&](const Point& x) {
        return detail::CellKey{static_cast<long>(std::floor((x[0] - lo0) / d)),
                               static_cast<long>(std::floor((x[1] - lo1) / d))};
    };
    auto centre = [&](detail::CellKey k) {
        Point c = p;
        c[0] = lo0 + (k.i + 0.5) * d;
        c[1] = lo1 + (k.j + 0.5) * d;
        return c;
    };
    auto usable = [&](const Point& x) {
        return x[0] >= lo0 && x[0] <= hi0 && x[1] >= lo1 && x[1] <= hi1 && ch.domain(x) &&
               (!ch.boundary_distance || ch.boundary_distance(x) >= cfg.min_boundary);
    };

    struct Node {
        Point x;
        long parent;
        Segment seg;
    };
    std::vector<Node> nodes{{p, -1, {}}};
    std::set<detail::CellKey> seen{cell_of(p)};
    std::deque<std::size_t> queue{0};
    const detail::CellKey target = cell_of(q);

    auto finish = [&](std::size_t leaf, Segment last) {
        std::vector<Segment> rev{std::move(last)};
        for (long k = static_cast<long>(leaf); nodes[k].parent >= 0; k = nodes[k].parent) rev.push_back(nodes[k].seg);
        res.path.assign(rev.rbegin(), rev.rend());
        res.found = true;
    };

    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        const Point x = nodes[cur].x;
        const detail::CellKey ck = cell_of(x);
        if (std::abs(ck.i - target.i) <= 1 && std::abs(ck.j - target.j) <= 1) {
            ++res.hops_tried;
            try {
                const Tangent v = log_map(ch, x, q);
                const Point e = exp_map(ch, x, v);
                if ((e - q).max_abs() <= 1e-8 * std::max(1.0, q.max_abs())) {
                    finish(cur, Segment{id, x, v, q});
                    break;
                }
            } catch (const Error&) {
            }
        }
        for (long di = -1; di <= 1; ++di)
            for (long dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (res.hops_tried >= cfg.budget) {
                    res.budget_exhausted = true;
                    queue.clear();
                    break;
                }
                const Point y = centre({ck.i + di, ck.j + dj});
                if (!usable(y)) continue;
                Tangent v(x.size());
                v[0] = y[0] - x[0];
                v[1] = y[1] - x[1];
                ++res.hops_tried;
                Point z;
                try {
                    z = exp_map(ch, x, v);
                } catch (const Error&) {
                    continue;
                }
                if (!usable(z)) continue;
                const detail::CellKey cz = cell_of(z);
                if (!seen.insert(cz).second) continue;
                nodes.push_back({z, static_cast<long>(cur), Segment{id, x, v, z}});
                queue.push_back(nodes.size() - 1);
            }
    }
    res.cells_reached = seen.size();
    return res;
}

// Re-integrates every segment and checks it ends where recorded while
// staying inside the chart domain.
inline bool verify_path(const std::vector<Segment>& path, double mu, double tol = 1e-8) {
    for (const auto& s : path) {
        const ChartSpec ch = make_chart(s.chart, mu);
        try {
            const Point e = exp_map(ch, s.start, s.velocity);
            if ((e - s.end).max_abs() > tol * std::max(1.0, s.end.max_abs())) return false;
        } catch (const Error&) {
            return false;
        }
    }
    for (std::size_t i = 1; i < path.size(); ++i)
        if (!(path[i].start == path[i - 1].end)) return false;
    return true;
}

}  // namespace hdks
