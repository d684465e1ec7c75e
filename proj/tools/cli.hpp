#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hdks/hdks.hpp"

namespace hdks::cli {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

// Usage errors found after CLI11 parsing (bad grid syntax, unknown coordinate).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A verification found violations: the report is still written.
inline constexpr int kOk = 0, kFinding = 1, kUsage = 2, kNumeric = 3;

// ---- formatting ------------------------------------------------------------

inline std::string fmt9(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x + 0.0);  // no negative zero
    return buf;
}

// Number rounded to 9 significant digits; non-finite values become null.
inline json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return std::strtod(fmt9(x).c_str(), nullptr);
}

template <class T>
json nums(const T& xs) {
    json a = json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

inline json opt_num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

// ---- grid and point specs --------------------------------------------------

struct Axis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    std::size_t count = 1;
    double at(std::size_t k) const { return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1); }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("bad number '" + s + "' in " + what);
    }
}

// "r=1.5:10:50,t=0:1:3" -> axes in the given order (first axis outermost).
inline std::vector<Axis> parse_grid(const std::string& spec) {
    std::vector<Axis> axes;
    for (const auto& item : split(spec, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("grid axis needs name=min:max:count: " + item);
        Axis a;
        a.name = item.substr(0, eq);
        const auto parts = split(item.substr(eq + 1), ':');
        if (parts.size() != 3) throw UsageError("grid axis needs min:max:count: " + item);
        a.lo = parse_double(parts[0], "grid");
        a.hi = parse_double(parts[1], "grid");
        const double c = parse_double(parts[2], "grid");
        if (!(c >= 1.0) || c != std::floor(c)) throw UsageError("grid count must be a positive integer: " + item);
        a.count = static_cast<std::size_t>(c);
        if (a.count > 1 && !(a.lo < a.hi)) throw UsageError("grid axis needs min < max: " + item);
        for (const auto& b : axes)
            if (b.name == a.name) throw UsageError("grid axis repeated: " + a.name);
        axes.push_back(a);
    }
    if (axes.empty()) throw UsageError("empty grid");
    return axes;
}

// "t=0,r=2" -> name/value pairs.
inline std::map<std::string, double> parse_assignments(const std::string& spec) {
    std::map<std::string, double> out;
    for (const auto& item : split(spec, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected name=value: " + item);
        out[item.substr(0, eq)] = parse_double(item.substr(eq + 1), "point");
    }
    return out;
}

// Coordinates a grid or point may leave out.
inline double coord_default(const std::string& name) {
    if (name == "theta") return 1.1;
    if (name == "phi") return 0.3;
    return std::nan("");
}

inline Point assemble_point(const ChartSpec& ch, const std::map<std::string, double>& vals) {
    for (const auto& [k, v] : vals)
        if (std::find(ch.coord_names.begin(), ch.coord_names.end(), k) == ch.coord_names.end())
            throw UsageError("chart " + ch.id + " has no coordinate '" + k + "'");
    Point p(ch.dim);
    for (std::size_t i = 0; i < ch.dim; ++i) {
        const auto it = vals.find(ch.coord_names[i]);
        p[i] = it != vals.end() ? it->second : coord_default(ch.coord_names[i]);
        if (std::isnan(p[i])) throw UsageError("missing coordinate '" + ch.coord_names[i] + "' for chart " + ch.id);
    }
    return p;
}

inline std::vector<Point> expand_grid(const ChartSpec& ch, const std::vector<Axis>& axes) {
    std::vector<Point> pts;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::map<std::string, double> vals;
        for (std::size_t a = 0; a < axes.size(); ++a) vals[axes[a].name] = axes[a].at(idx[a]);
        pts.push_back(assemble_point(ch, vals));
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].count) break;
            idx[a] = 0;
            if (a == 0) return pts;
        }
    }
}

inline std::string scaled_grid(std::initializer_list<std::tuple<const char*, double, double, int>> axes) {
    std::string s;
    for (const auto& [n, lo, hi, c] : axes) {
        if (!s.empty()) s += ',';
        s += std::string(n) + "=" + fmt9(lo) + ":" + fmt9(hi) + ":" + std::to_string(c);
    }
    return s;
}

// Interior grids used when --grid is not given.
inline std::string default_verify_grid(const std::string& id, double mu) {
    const double s = std::sqrt(mu);
    if (id == "hd" || id == "hd_plane") return scaled_grid({{"t", 0, 1, 3}, {"r", 1.5 * mu, 10 * mu, 20}});
    if (id == "schwarzschild_unimodular")
        return scaled_grid({{"t", 0, 1, 3}, {"h", 0.1 * mu * mu * mu, 10 * mu * mu * mu, 20}});
    if (id == "uniquely2") return scaled_grid({{"t", 0, 1, 3}, {"h", 1.5 * mu, 10 * mu, 20}});
    if (id == "ks" || id == "ks_plane") return scaled_grid({{"u", -0.9 * s, 1.3 * s, 8}, {"v", -0.9 * s, 1.3 * s, 8}});
    if (id == "painleve_gullstrand") return scaled_grid({{"z", 0, 1, 3}, {"r", 0.3 * mu, 5 * mu, 20}});
    if (id == "eddington_paper" || id == "eddington_derived")
        return scaled_grid({{"T", 0, 1, 3}, {"r", 0.3 * mu, 5 * mu, 20}});
    if (id == "lemaitre_paper" || id == "lemaitre_alt")
        return scaled_grid({{"tau", 0, 0.5 * mu, 3}, {"rho", 1.5 * mu, 5 * mu, 20}});
    if (id == "kruskal_xy") return scaled_grid({{"x", 0.5, 2, 8}, {"y", -0.3, 0.3, 3}});
    if (id == "er_bridge" || id == "er_bridge_paper") return scaled_grid({{"t", 0, 1, 3}, {"u", -2 * s, 2 * s, 20}});
    if (id == "euclid_shifted") return scaled_grid({{"R", 1.5 * mu, 10 * mu, 20}});
    if (id == "minkowski") return scaled_grid({{"t", 0, 1, 3}, {"x", 0.5, 2, 5}, {"y", 0, 0, 1}, {"z", 0, 0, 1}});
    throw UsageError("no default grid for chart " + id);
}

inline bool flat_chart(const std::string& id) { return id == "euclid_shifted" || id == "minkowski"; }

inline std::optional<StaticModel> static_model_of(const std::string& id, double mu) {
    if (id == "hd" || id == "hd_plane") return hd_model(mu);
    if (id == "schwarzschild_unimodular") return unimodular_model(mu);
    if (id == "uniquely2") return uniquely2_model(mu);
    return std::nullopt;
}

// ---- report envelope -------------------------------------------------------

inline json resolved_config(const CLI::App* sub) {
    json c = json::object();
    for (const CLI::Option* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name == "help" || name == "config" || name == "output") continue;
        if (o->get_expected_min() == 0) {
            c[name] = o->count() > 0;
        } else if (o->count() > 0) {
            const auto& r = o->results();
            std::string v;
            for (std::size_t i = 0; i < r.size(); ++i) v += (i ? "," : "") + r[i];
            c[name] = v;
        } else {
            c[name] = o->get_default_str();
        }
    }
    return c;
}

inline json envelope(const std::string& command, const CLI::App* sub, json result) {
    json j;
    j["tool"] = "hdks";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = resolved_config(sub);
    j["result"] = std::move(result);
    return j;
}

struct Common {
    double mu = 1.0;
    std::string format = "json";
    std::string output;
    std::string config;
    unsigned jobs = 0;  // 0: machine parallelism
    std::uint64_t seed = 1;

    unsigned workers() const { return jobs ? jobs : std::max(1u, std::thread::hardware_concurrency()); }
};

inline void add_common(CLI::App* sub, Common& c, std::initializer_list<std::string> formats) {
    sub->add_option("--mu", c.mu, "Mass parameter mu > 0")->capture_default_str();
    sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember(std::vector<std::string>(formats)))
        ->capture_default_str();
    sub->add_option("--output", c.output, "Write the report to this file instead of stdout");
    sub->add_option("--config", c.config, "key=value file; flags override its entries");
    sub->add_option("--jobs", c.jobs, "Worker threads for grid sweeps (0: machine parallelism)")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for sampled searches")->capture_default_str();
}

// ---- subcommands -----------------------------------------------------------

struct Outcome {
    int code = kOk;
    std::string text;  // the report
};

inline std::string csv_join(std::initializer_list<std::string> xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
    return s;
}

struct VerifyOpts {
    std::string chart;
    std::string grid;
    std::string scheme = "auto";
    double tol = 1e-5;
};

inline Outcome run_verify(const Common& c, const VerifyOpts& o, const CLI::App* sub) {
    const ChartSpec ch = make_chart(o.chart, c.mu);
    const auto axes = parse_grid(o.grid.empty() ? default_verify_grid(o.chart, c.mu) : o.grid);
    const auto pts = expand_grid(ch, axes);
    std::optional<Scheme> scheme;
    if (o.scheme == "closed") scheme = Scheme::closed_form;
    if (o.scheme == "fd") scheme = Scheme::finite_difference;
    if (scheme == Scheme::closed_form && !ch.has_closed_form())
        throw UsageError("chart " + o.chart + " has no closed-form Christoffel symbols");
    const bool flat = flat_chart(o.chart);
    const Scheme sch = scheme.value_or(preferred_scheme(ch));

    struct Row {
        bool skipped = false;
        std::string reason;
        double residual = 0.0;
    };
    const auto rows = parallel_map<Row>(pts.size(), c.workers(), [&](std::size_t i) {
        Row r;
        if (!ch.domain(pts[i])) return Row{true, "outside domain", 0.0};
        try {
            r.residual = flat ? riemann(ch, pts[i], sch).max_abs() : ricci_and_residual(ch, pts[i], sch).residual;
        } catch (const DomainError& e) {
            return Row{true, e.what(), 0.0};
        }
        return r;
    });

    double worst = 0.0;
    std::size_t used = 0;
    for (const auto& r : rows)
        if (!r.skipped) {
            worst = std::max(worst, r.residual);
            ++used;
        }
    if (used == 0) throw DomainError("verify: no grid point lies inside the chart domain");

    // closed-form warped residuals where the chart is a static model
    std::optional<double> rho;
    if (const auto m = static_model_of(o.chart, c.mu)) {
        double w = 0.0;
        for (const auto& p : pts)
            if (m->contains(p[1])) w = std::max(w, warped_vacuum_residual(*m, p[1]).max());
        rho = w;
    }

    const bool pass = worst < o.tol;
    Outcome out;
    out.code = pass ? kOk : kFinding;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "index";
        for (const auto& n : ch.coord_names) os << ',' << n;
        os << ',' << (flat ? "riemann_residual" : "ricci_residual") << ",status\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os << i;
            for (double x : pts[i]) os << ',' << fmt9(x);
            os << ',' << (rows[i].skipped ? "" : fmt9(rows[i].residual)) << ','
               << (rows[i].skipped ? "skipped" : "ok") << '\n';
        }
        os << "# chart=" << o.chart << " max_residual=" << fmt9(worst) << " tol=" << fmt9(o.tol)
           << " pass=" << (pass ? 1 : 0) << '\n';
        out.text = os.str();
        return out;
    }
    json res;
    res["chart"] = o.chart;
    res["residual_kind"] = flat ? "riemann" : "ricci";
    res["scheme"] = sch == Scheme::closed_form ? "closed_form" : "finite_difference";
    res["points"] = pts.size();
    res["evaluated"] = used;
    res["max_residual"] = num(worst);
    if (rho) res["warped_rho_max"] = num(*rho);
    res["tol"] = num(o.tol);
    res["pass"] = pass;
    json arr = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        json e;
        e["x"] = nums(pts[i]);
        if (rows[i].skipped) e["skipped"] = rows[i].reason;
        else e["residual"] = num(rows[i].residual);
        arr.push_back(std::move(e));
    }
    res["grid"] = std::move(arr);
    out.text = envelope("verify", sub, std::move(res)).dump(2) + "\n";
    return out;
}

struct TraceOpts {
    std::string chart = "ks";
    std::string init;
    bool null = false;
    bool timelike = false;
    double affine_max = 10.0;
    std::string events = "horizon,blowup";
    std::string scheme = "auto";
};

// Solves for the first velocity component so that g(v, v) = target.
inline void normalise_first(const Matrix& g, Tangent& v, double target, bool given) {
    const std::size_t n = v.size();
    double b = 0.0, cc = 0.0;
    for (std::size_t j = 1; j < n; ++j) b += g(0, j) * v[j];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) cc += g(i, j) * v[i] * v[j];
    const double a = g(0, 0);
    // a x^2 + 2 b x + cc - target = 0
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) < 1e-300) throw UsageError("trace: cannot normalise, the first velocity component drops out");
        v[0] = (target - cc) / (2.0 * b);
        return;
    }
    const double disc = b * b - a * (cc - target);
    if (disc < 0.0) throw UsageError("trace: no real velocity satisfies the requested normalisation");
    const double r1 = (-b + std::sqrt(disc)) / a, r2 = (-b - std::sqrt(disc)) / a;
    if (given) v[0] = std::abs(r1 - v[0]) <= std::abs(r2 - v[0]) ? r1 : r2;
    else v[0] = std::max(r1, r2);
}

inline Outcome run_trace(const Common& c, const TraceOpts& o, const CLI::App* sub) {
    if (o.null && o.timelike) throw UsageError("trace: --null and --timelike are exclusive");
    if (!(o.affine_max > 0.0)) throw UsageError("trace: --affine-max must be positive");
    const ChartSpec ch = make_chart(o.chart, c.mu);
    const auto vals = parse_assignments(o.init);
    std::map<std::string, double> pos, vel;
    for (const auto& [k, v] : vals) {
        const bool is_coord = std::find(ch.coord_names.begin(), ch.coord_names.end(), k) != ch.coord_names.end();
        if (is_coord) pos[k] = v;
        else if (k.size() > 1 && k[0] == 'd') vel[k.substr(1)] = v;
        else throw UsageError("trace: unknown init entry '" + k + "'");
    }
    // on the equator by default so that angular motion stays regular
    const auto& names = ch.coord_names;
    if (std::find(names.begin(), names.end(), "theta") != names.end() && !pos.count("theta")) pos["theta"] = M_PI / 2;
    if (std::find(names.begin(), names.end(), "phi") != names.end() && !pos.count("phi")) pos["phi"] = 0.0;
    const Point p = assemble_point(ch, pos);
    Tangent v(ch.dim);
    for (const auto& [k, x] : vel) {
        const auto it = std::find(ch.coord_names.begin(), ch.coord_names.end(), k);
        if (it == ch.coord_names.end()) throw UsageError("trace: unknown velocity component 'd" + k + "'");
        v[static_cast<std::size_t>(it - ch.coord_names.begin())] = x;
    }
    require_domain(ch, p);
    if (o.null || o.timelike) normalise_first(metric_eval(ch, p), v, o.null ? 0.0 : -1.0, vel.count(ch.coord_names[0]) > 0);

    IntegrationConfig cfg;
    cfg.lambda_max = o.affine_max;
    cfg.horizon_events = cfg.blowup_events = false;
    for (const auto& e : split(o.events, ',')) {
        if (e == "horizon") cfg.horizon_events = true;
        else if (e == "blowup") cfg.blowup_events = true;
        else if (e != "none") throw UsageError("trace: unknown event '" + e + "'");
    }
    if (o.scheme == "closed") cfg.scheme = Scheme::closed_form;
    if (o.scheme == "fd") cfg.scheme = Scheme::finite_difference;
    const Trajectory tr = integrate(ch, GeodesicState{p, v, 0.0}, cfg);

    Outcome out;
    out.code = tr.termination == Termination::step_underflow ? kNumeric : kOk;
    if (c.format == "csv") {
        std::ostringstream os;
        write_trajectory_csv(os, ch, tr, fmt9);
        out.text = os.str();
        return out;
    }
    json res;
    res["chart"] = ch.id;
    res["start"] = {{"x", nums(p)}, {"v", nums(v)}};
    res["termination"] = to_string(tr.termination);
    res["horizon_crossed"] = tr.horizon_crossed;
    res["max_norm_drift"] = num(tr.max_norm_drift());
    res["max_energy_drift"] = num(tr.max_energy_drift());
    json ev = json::array();
    for (const auto& e : tr.events) ev.push_back({{"kind", e.kind}, {"lambda", num(e.lambda)}, {"x", nums(e.x)}});
    res["events"] = std::move(ev);
    json sm = json::array();
    for (const auto& s : tr.samples)
        sm.push_back({{"lambda", num(s.lambda)}, {"x", nums(s.x)}, {"v", nums(s.v)}, {"E", opt_num(s.energy)},
                      {"norm", num(s.norm)}, {"region", s.region}});
    res["samples"] = std::move(sm);
    out.text = envelope("trace", sub, std::move(res)).dump(2) + "\n";
    return out;
}

struct TransformOpts {
    std::string from = "hd";
    std::string to = "ks";
    std::string region;
    std::string point;
};

inline Outcome run_transform(const Common& c, const TransformOpts& o, const CLI::App* sub) {
    const auto vals = parse_assignments(o.point);
    // A point given by its first two coordinates maps through the plane charts.
    auto plane = [&](const std::string& id) {
        if (vals.size() <= 2 && (id == "hd" || id == "ks")) return id + "_plane";
        return id;
    };
    const std::string src = plane(o.from), dst = plane(o.to);
    const ChartSpec sc = make_chart(src, c.mu);
    const Point p = assemble_point(sc, vals);
    require_domain(sc, p);
    std::string branch = o.region;
    const bool hd_like = o.from == "hd";
    if (branch.empty() && hd_like && o.to == "ks") branch = p[1] > c.mu ? "R_II_plus" : "R_I_plus";
    if (branch.empty() && (o.from == "er_bridge" || o.from == "er_bridge_paper")) branch = p[1] > 0 ? "N1" : "N2";
    // registered direction first, else the inverse of the reverse transition
    std::optional<TransitionMap> fwd, rev;
    try {
        fwd = make_transition(src, dst, branch, c.mu);
    } catch (const DomainError&) {
        rev = make_transition(dst, src, branch.empty() ? "R_II_plus" : branch, c.mu);
    }
    if (fwd && !fwd->domain(p)) throw DomainError("transform: point outside the branch " + branch);
    const Point q = fwd ? fwd->forward(p) : rev->inverse(p);
    const ChartSpec tc = make_chart(dst, c.mu);
    Outcome out;
    if (c.format == "text") {
        std::ostringstream os;
        char buf[64];
        for (std::size_t i = 0; i < std::min(q.size(), vals.size()); ++i) {
            std::snprintf(buf, sizeof buf, "%s=%.6f", tc.coord_names[i].c_str(), q[i]);
            os << (i ? " " : "") << buf;
        }
        os << '\n';
        out.text = os.str();
        return out;
    }
    if (c.format == "csv") {
        std::ostringstream os;
        for (std::size_t i = 0; i < tc.dim; ++i) os << (i ? "," : "") << tc.coord_names[i];
        os << '\n';
        for (std::size_t i = 0; i < q.size(); ++i) os << (i ? "," : "") << fmt9(q[i]);
        os << '\n';
        out.text = os.str();
        return out;
    }
    json res;
    res["from"] = src;
    res["to"] = dst;
    res["branch"] = branch;
    res["point"] = nums(p);
    json img;
    for (std::size_t i = 0; i < tc.dim; ++i) img[tc.coord_names[i]] = num(q[i]);
    res["image"] = std::move(img);
    out.text = envelope("transform", sub, std::move(res)).dump(2) + "\n";
    return out;
}

struct EmbedOpts {
    std::string map = "fronsdal";
    std::string branch = "both";
    bool mirror = false;
    std::string integrand = "fronsdal";
    std::string signature = "kasner";
    std::string target = "derived";
    std::string grid;
    double tol = 1e-6;
};

inline Outcome run_embed(const Common& c, const EmbedOpts& o, const CLI::App* sub) {
    const double mu = c.mu;
    std::vector<EmbeddingMap> maps;
    std::vector<std::string> grids;
    if (o.map == "fronsdal") {
        const WKind kind = w_kind_from_string(o.integrand);
        if (kind == WKind::kasner) throw UsageError("embed: the kasner integrand belongs to --map kasner");
        if (o.branch == "exterior" || o.branch == "both") {
            maps.push_back(fronsdal_map(mu, FronsdalBranch::exterior, o.mirror, kind));
            grids.push_back(scaled_grid({{"t", -5, 5, 11}, {"r", 1.5 * mu, 6 * mu, 6}, {"theta", 0.4, 2.7, 3}, {"phi", 0, 5, 3}}));
        }
        if (o.branch == "interior" || o.branch == "both") {
            maps.push_back(fronsdal_map(mu, FronsdalBranch::interior, o.mirror, kind));
            grids.push_back(scaled_grid({{"t", -5, 5, 11}, {"r", 0.2 * mu, 0.8 * mu, 6}, {"theta", 0.4, 2.7, 3}, {"phi", 0, 5, 3}}));
        }
        if (maps.empty()) throw UsageError("embed: --branch must be exterior, interior or both");
    } else {
        const AmbientFlat6 amb = o.signature == "conditions" ? AmbientFlat6::kasner_conditions() : AmbientFlat6::kasner();
        maps.push_back(kasner_map(mu, amb, o.target == "printed" ? KasnerTarget::printed : KasnerTarget::derived));
        grids.push_back(scaled_grid({{"t", 0, 6, 7}, {"H", 0.5 * mu, 5 * mu, 10}, {"theta", 0.4, 2.7, 3}, {"phi", 0, 5, 3}}));
    }
    const std::vector<std::string> names = o.map == "fronsdal" ? std::vector<std::string>{"t", "r", "theta", "phi"}
                                                               : std::vector<std::string>{"t", "H", "theta", "phi"};
    ChartSpec shape;
    shape.id = o.map;
    shape.dim = 4;
    shape.coord_names = names;

    struct Row {
        CloudPoint cp;
        double rel = 0.0, abs = 0.0, constraint = 0.0;
        bool skipped = false;
    };
    std::vector<Row> all;
    double worst_rel = 0.0, worst_abs = 0.0, worst_con = 0.0;
    for (std::size_t k = 0; k < maps.size(); ++k) {
        const auto& m = maps[k];
        const auto pts = expand_grid(shape, parse_grid(o.grid.empty() ? grids[k] : o.grid));
        auto rows = parallel_map<Row>(pts.size(), c.workers(), [&](std::size_t i) {
            Row r;
            r.cp.source = pts[i];
            r.cp.branch = m.branch;
            if (!m.domain(pts[i])) {
                r.skipped = true;
                return r;
            }
            r.cp.u = m.map(pts[i]);
            const PullbackResult pb = pullback(m, pts[i]);
            r.rel = pb.relative;
            r.abs = pb.absolute;
            if (o.map == "fronsdal") r.constraint = fronsdal_constraints(mu, r.cp.u, w_kind_from_string(o.integrand)).max();
            return r;
        });
        for (auto& r : rows) {
            if (r.skipped) continue;
            worst_rel = std::max(worst_rel, r.rel);
            worst_abs = std::max(worst_abs, r.abs);
            worst_con = std::max(worst_con, r.constraint);
            all.push_back(std::move(r));
        }
    }
    if (all.empty()) throw DomainError("embed: no grid point lies inside the branch domain");
    const bool pass = worst_rel < o.tol;
    Outcome out;
    out.code = pass ? kOk : kFinding;
    if (c.format == "csv") {
        std::ostringstream os;
        std::vector<CloudPoint> cloud;
        for (const auto& r : all) cloud.push_back(r.cp);
        write_point_cloud_csv(os, names, cloud, fmt9);
        os << "# map=" << o.map << " max_pullback_relative=" << fmt9(worst_rel) << " max_pullback_absolute="
           << fmt9(worst_abs) << " max_constraint=" << fmt9(worst_con) << '\n';
        out.text = os.str();
        return out;
    }
    json res;
    res["map"] = o.map;
    res["ambient_signature"] = nums(maps.front().ambient.signature);
    res["points"] = all.size();
    res["max_pullback_relative"] = num(worst_rel);
    res["max_pullback_absolute"] = num(worst_abs);
    if (o.map == "fronsdal") res["max_constraint"] = num(worst_con);
    res["tol"] = num(o.tol);
    res["pass"] = pass;
    json cloud = json::array();
    for (const auto& r : all)
        cloud.push_back({{"u", nums(r.cp.u)}, {"source", nums(r.cp.source)}, {"branch", r.cp.branch},
                         {"pullback_relative", num(r.rel)}});
    res["cloud"] = std::move(cloud);
    out.text = envelope("embed", sub, std::move(res)).dump(2) + "\n";
    return out;
}

struct CurvatureOpts {
    std::string grid;
    double tol = 1e-6;
};

inline Outcome run_curvature(const Common& c, const CurvatureOpts& o, const CLI::App* sub) {
    const double mu = c.mu, s = std::sqrt(mu);
    const ChartSpec ks = make_chart("ks_plane", mu);
    const KsProfile prof(mu);
    const StaticModel hd = hd_model(mu);
    const auto pts =
        expand_grid(ks, parse_grid(o.grid.empty() ? scaled_grid({{"u", -1.5 * s, 1.5 * s, 13}, {"v", -1.5 * s, 1.5 * s, 13}}) : o.grid));
    struct Row {
        bool skipped = false;
        double r = 0.0, S = 0.0, K = std::nan(""), mismatch = 0.0;
        std::string region;
    };
    const auto rows = parallel_map<Row>(pts.size(), c.workers(), [&](std::size_t i) {
        Row row;
        const double u = pts[i][0], v = pts[i][1];
        if (!ks.domain(pts[i])) {
            row.skipped = true;
            return row;
        }
        row.r = prof.f_inv(u * v);
        row.S = ks_sectional(prof, u, v);
        row.region = to_string(classify_region(mu, u, v));
        if (row.region != "Horizon") {
            row.K = static_plane_curvature(hd, row.r);
            row.mismatch = std::abs(row.S - row.K);
        }
        return row;
    });
    double worst = 0.0, peak = 0.0;
    for (const auto& r : rows)
        if (!r.skipped) {
            worst = std::max(worst, r.mismatch);
            peak = std::max(peak, std::abs(r.S));
        }
    const bool pass = worst < o.tol;
    Outcome out;
    out.code = pass ? kOk : kFinding;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "u,v,r,S,K_hd,mismatch,region\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (rows[i].skipped) continue;
            os << csv_join({fmt9(pts[i][0]), fmt9(pts[i][1]), fmt9(rows[i].r), fmt9(rows[i].S),
                            std::isnan(rows[i].K) ? "" : fmt9(rows[i].K), fmt9(rows[i].mismatch), rows[i].region})
               << '\n';
        }
        os << "# max_mismatch=" << fmt9(worst) << " max_abs_S=" << fmt9(peak) << '\n';
        out.text = os.str();
        return out;
    }
    json res;
    res["chart"] = "ks_plane";
    res["max_abs_S"] = num(peak);
    res["max_mismatch"] = num(worst);
    res["tol"] = num(o.tol);
    res["pass"] = pass;
    json arr = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (rows[i].skipped) continue;
        json e;
        e["u"] = num(pts[i][0]);
        e["v"] = num(pts[i][1]);
        e["r"] = num(rows[i].r);
        e["S"] = num(rows[i].S);
        e["K_hd"] = std::isnan(rows[i].K) ? json(nullptr) : num(rows[i].K);
        e["region"] = rows[i].region;
        arr.push_back(std::move(e));
    }
    res["grid"] = std::move(arr);
    out.text = envelope("curvature", sub, std::move(res)).dump(2) + "\n";
    return out;
}

struct TopologyOpts {
    std::string space = "hd";
    std::string query = "connectivity";
    std::string from, to;
    std::string from_region = "R_I_plus", to_region = "R_II_plus";
    std::size_t budget = 20000;
    std::string gluing;
    std::size_t sequences = 10000;
    std::string variant = "derived";
};

inline json point_json(const Point& p) { return nums(p); }

inline Outcome run_topology(const Common& c, const TopologyOpts& o, const CLI::App* sub) {
    const double mu = c.mu;
    const Space space = space_from_string(o.space);
    json res;
    res["space"] = o.space;
    res["query"] = o.query;
    if (o.query == "connectivity") {
        const ChartSpec ch = make_chart(atlas_of(space).front(), mu);
        // (t, r) style inputs; defaults are one point on each side of r = mu
        auto endpoint = [&](const std::string& spec, double r_default, double t_default, const std::string& reg) {
            auto vals = parse_assignments(spec);
            const std::string radial = space == Space::er ? "u" : (space == Space::schwarzschild ? "h" : "r");
            for (const auto& [k, v] : vals)
                if (k != "t" && k != radial) throw UsageError("topology: point entries are t and " + radial);
            const double t = vals.count("t") ? vals["t"] : t_default;
            const double r = vals.count(radial) ? vals[radial] : r_default;
            return space_point(space, mu, t, r, region_from_string(reg));
        };
        const bool er = space == Space::er;
        const bool sw = space == Space::schwarzschild;
        const Point p = endpoint(o.from, er ? mu : (sw ? 0.2 * mu * mu * mu : 0.5 * mu), 0.0, o.from_region);
        const Point q = endpoint(o.to, er ? -mu : (sw ? 3.0 * mu * mu * mu : 2.0 * mu), sw ? 1.0 : 0.0, o.to_region);
        if (!ch.domain(p) || !ch.domain(q)) throw DomainError("topology: query point outside the atlas");
        ConnectivityConfig cfg;
        cfg.budget = o.budget;
        const ConnectivityResult r = connectivity(space, mu, p, q, cfg);
        res["points"] = {{"p", point_json(p)}, {"q", point_json(q)}, {"chart", ch.id}};
        res["result"] = r.found ? "path" : "not_found";
        res["budget_exhausted"] = r.budget_exhausted;
        res["hops_tried"] = r.hops_tried;
        res["cells_reached"] = r.cells_reached;
        if (r.found) {
            json path = json::array();
            for (const auto& s : r.path)
                path.push_back({{"chart", s.chart}, {"start", point_json(s.start)}, {"velocity", nums(s.velocity)},
                                {"end", point_json(s.end)}});
            res["path"] = std::move(path);
            res["path_verified"] = verify_path(r.path, mu);
        }
        if (r.certificate) {
            res["certificate"] = {{"horizon_excluded", r.certificate->horizon_excluded},
                                  {"components_split", r.certificate->components_split},
                                  {"charts_checked", r.certificate->charts_checked},
                                  {"points_checked", r.certificate->points_checked},
                                  {"holds", r.certificate->holds()}};
        }
        if (r.glued_regions) res["glued_regions"] = *r.glued_regions;
        res["resolution"] = num(r.resolution);
    } else if (o.query == "hausdorff") {
        std::string g = o.gluing.empty() ? (space == Space::er ? "er_bridge" : "doubled_origin") : o.gluing;
        GluingStructure G;
        if (g == "doubled_origin") G = doubled_origin_line();
        else if (g == "identity") G = identity_gluing();
        else if (g == "er_bridge") G = er_gluing();
        else throw UsageError("topology: unknown gluing " + g);
        HausdorffSearchConfig cfg;
        cfg.sequences = o.sequences;
        cfg.seed = c.seed;
        const auto w = hausdorff_witness(G, cfg);
        res["gluing"] = g;
        res["result"] = w ? "witness" : "none_found";
        if (w) res["witness"] = {{"p", point_json(w->p)}, {"q", point_json(w->q)}, {"radii", nums(w->radii_checked)}};
        res["resolution"] = num(cfg.resolution);
    } else if (o.query == "bridge") {
        const bool printed = o.variant == "paper";
        if (!printed && o.variant != "derived") throw UsageError("topology: --variant is derived or paper");
        const ChartSpec ch = make_chart(printed ? "er_bridge_paper" : "er_bridge", mu);
        const auto glued = er_bridge(mu, 200);
        res["result"] = "bridge";
        res["variant"] = o.variant;
        res["homothety"] = num(bridge_homothety(mu, printed));
        res["g_tt_on_bridge"] = num(er_bridge_components(mu, 0.0, printed).g_tt);
        res["glued_regions"] = glued.space.region_count();
        res["quotient_consistent"] = glued.space.quotient_consistent();
        const double su = std::sqrt(mu);
        res["residuals"] = {{"metric_jump", num(er_metric_jump(mu, printed))},
                            {"ricci_u_plus", num(ricci_and_residual(ch, Point{0.0, su, 1.1, 0.3}).residual)},
                            {"ricci_u_minus", num(ricci_and_residual(ch, Point{0.0, -su, 1.1, 0.3}).residual)}};
        res["resolution"] = num(1e-12);
    } else {
        throw UsageError("topology: --query is connectivity, hausdorff or bridge");
    }
    Outcome out;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "key,value\n";
        for (const auto& [k, v] : res.items())
            if (!v.is_structured()) os << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        out.text = os.str();
        return out;
    }
    out.text = envelope("topology", sub, std::move(res)).dump(2) + "\n";
    return out;
}

// ---- conformance dossier ---------------------------------------------------

inline double max_ricci(const ChartSpec& ch, const std::vector<Point>& pts) {
    double w = 0.0;
    for (const auto& p : pts) w = std::max(w, ricci_and_residual(ch, p).residual);
    return w;
}

inline double max_pullback(const std::string& target, const ChartSpec& tgt, double mu, const std::vector<Point>& pts) {
    const TransitionMap tm = make_transition("hd", target, "", mu);
    const ChartSpec hd = make_chart("hd", mu);
    double w = 0.0;
    for (const auto& p : pts) w = std::max(w, transition_pullback_residual(tm, hd, tgt, p));
    return w;
}

inline json entry(const std::string& id, const std::string& paper, const std::string& alt, json measured) {
    json e;
    e["id"] = id;
    e["paper_form"] = paper;
    e["alternative_form"] = alt;
    e["measured"] = std::move(measured);
    return e;
}

inline json conformance_dossier(double mu) {
    json entries = json::array();
    const double su = std::sqrt(mu);
    const std::vector<Point> hd_pts{{0.3, 0.5 * mu, 1.1, 0.3}, {0.3, 2.0 * mu, 1.1, 0.3}, {-0.7, 3.0 * mu, 0.8, 1.0}};
    const std::vector<Point> ext_pts{{0.3, 2.0 * mu, 1.1, 0.3}, {-0.7, 3.0 * mu, 0.8, 1.0}};

    {
        const ChartSpec p = make_chart("eddington_paper", mu), d = make_chart("eddington_derived", mu);
        std::vector<Point> pts;
        for (const auto& x : hd_pts) pts.push_back(make_transition("hd", "eddington_paper", "", mu).forward(x));
        entries.push_back(entry("eddington_cross_sign", "-f dT^2 + (mu/r)(dT dr + dr dT) + (1 + mu/r) dr^2",
                                "-f dT^2 - (mu/r)(dT dr + dr dT) + (1 + mu/r) dr^2",
                                {{"paper_ricci", num(max_ricci(p, pts))},
                                 {"alternative_ricci", num(max_ricci(d, pts))},
                                 {"paper_pullback", num(max_pullback("eddington_paper", p, mu, hd_pts))},
                                 {"alternative_pullback", num(max_pullback("eddington_derived", d, mu, hd_pts))}}));
    }
    {
        const ChartSpec p = make_chart("lemaitre_paper", mu), a = make_chart("lemaitre_alt", mu);
        const std::vector<Point> pts{{0.0, 2.0 * mu, 1.1, 0.3}, {0.5 * mu, 3.0 * mu, 0.8, 1.0}, {0.2 * mu, 1.5 * mu, 1.4, 2.0}};
        entries.push_back(entry("lemaitre_constant", "r = ((2/3) sqrt(mu) (rho - tau))^(2/3)",
                                "r = ((3/2) sqrt(mu) (rho - tau))^(2/3)",
                                {{"paper_ricci", num(max_ricci(p, pts))}, {"alternative_ricci", num(max_ricci(a, pts))}}));
    }
    {
        const ChartSpec p = make_kruskal_xy_chart(mu, KruskalXyProfile::printed);
        const ChartSpec sq = make_kruskal_xy_chart(mu, KruskalXyProfile::squared);
        const ChartSpec d = make_kruskal_xy_chart(mu, KruskalXyProfile::derived);
        const TransitionMap tm = make_transition("hd", "kruskal_xy", "", mu);
        std::vector<Point> pts;
        for (const auto& x : ext_pts) pts.push_back(tm.forward(x));
        entries.push_back(entry("kruskal_xy_profile", "-F dx^2 + F dy^2 with F^2 = (16 mu / r) exp(-r/mu)",
                                "(4 mu^3 / r) exp(-r/mu) (dx^2 - dy^2)",
                                {{"paper_ricci", num(max_ricci(p, pts))},
                                 {"paper_squared_ricci", num(max_ricci(sq, pts))},
                                 {"alternative_ricci", num(max_ricci(d, pts))},
                                 {"paper_pullback", num(max_pullback("kruskal_xy", p, mu, ext_pts))},
                                 {"paper_squared_pullback", num(max_pullback("kruskal_xy", sq, mu, ext_pts))},
                                 {"alternative_pullback", num(max_pullback("kruskal_xy", d, mu, ext_pts))}}));
    }
    {
        const ChartSpec p = make_chart("er_bridge_paper", mu), d = make_chart("er_bridge", mu);
        const std::vector<Point> pts{{0.0, su, 1.1, 0.3}, {0.4, -su, 0.8, 1.0}, {0.0, 2.0 * su, 1.4, 2.0}};
        entries.push_back(entry("er_factor",
                                "-u^2/(u^2+mu^2) dt^2 + 4(u^2+mu^2) du^2 + (u^2+mu^2) dOmega^2",
                                "-u^2/(u^2+mu) dt^2 + 4(u^2+mu) du^2 + (u^2+mu)^2 dOmega^2",
                                {{"paper_ricci", num(max_ricci(p, pts))},
                                 {"alternative_ricci", num(max_ricci(d, pts))},
                                 {"paper_bridge_homothety", num(bridge_homothety(mu, true))},
                                 {"alternative_bridge_homothety", num(bridge_homothety(mu, false))}}));
    }
    {
        const ChartSpec hd = make_chart("hd", mu);
        double dp = 0.0, da = 0.0, dfd = 0.0;
        for (const auto& x : hd_pts) {
            const double r = x[1], f = 1.0 - mu / r, df = mu / (r * r);
            const double gc = christoffel(hd, x, Scheme::closed_form)(0, 0, 1);
            const double gf = christoffel(hd, x, Scheme::finite_difference)(0, 0, 1);
            dp = std::max(dp, std::abs(gf + df / (2.0 * f)));
            da = std::max(da, std::abs(gf - df / (2.0 * f)));
            dfd = std::max(dfd, std::abs(gf - gc));
        }
        entries.push_back(entry("coderivatives_sign", "Gamma^t_tr = -f'/(2f)", "Gamma^t_tr = +f'/(2f)",
                                {{"paper_residual", num(dp)},
                                 {"alternative_residual", num(da)},
                                 {"closed_vs_fd", num(dfd)}}));
    }
    {
        json m;
        const std::vector<Point> pts{{0.3, 0.5 * mu, 1.1, 0.3}, {1.7, 1.0 * mu, 0.8, 1.0}, {0.3, 3.0 * mu, 1.4, 2.0}};
        for (const auto& [sig_name, amb] : {std::pair{"kasner_signature", AmbientFlat6::kasner()},
                                            std::pair{"conditions_signature", AmbientFlat6::kasner_conditions()}})
            for (const auto& [tgt_name, tgt] :
                 {std::pair{"paper_target", KasnerTarget::printed}, std::pair{"derived_target", KasnerTarget::derived}}) {
                const EmbeddingMap km = kasner_map(mu, amb, tgt);
                double w = 0.0;
                for (const auto& p : pts) w = std::max(w, pullback(km, p).absolute);
                m[std::string(sig_name) + "/" + tgt_name] = num(w);
            }
        entries.push_back(entry("kasner_signature", "ambient (-,-,+,+,+,+); chart metric with -dH^2 term",
                                "ambient (+,+,-,+,+,+) from the imbedding conditions; chart metric (1 + H^2/(4 mu^2)) dH^2",
                                std::move(m)));
    }
    {
        const KsProfile prof(mu);
        const ChartSpec ks = make_chart("ks_plane", mu);
        double dp = 0.0, da = 0.0;
        for (const auto& [u, v] : {std::pair{0.5 * su, 0.7 * su}, std::pair{-0.4 * su, 0.9 * su}, std::pair{1.2 * su, 1.1 * su}}) {
            const double S = sectional_curvature_numeric(ks, Point{u, v});
            dp = std::max(dp, std::abs(S - ks_sectional_unsigned(prof, u, v)));
            da = std::max(da, std::abs(S - ks_sectional(prof, u, v)));
        }
        entries.push_back(entry("ks_sectional_sign", "S = (2/F) d_v(F_u/F)", "S = -(2/F) d_v(F_u/F)",
                                {{"paper_residual", num(dp)}, {"alternative_residual", num(da)}}));
    }
    {
        double dp = 0.0, da = 0.0;
        const std::vector<std::pair<FronsdalBranch, Point>> pts{{FronsdalBranch::exterior, {0.5, 3.0 * mu, 1.1, 0.3}},
                                                                {FronsdalBranch::interior, {0.5, 0.5 * mu, 1.1, 0.3}}};
        for (const auto& [b, p] : pts) {
            dp = std::max(dp, pullback(fronsdal_map(mu, b, false, WKind::fronsdal_paper), p).relative);
            da = std::max(da, pullback(fronsdal_map(mu, b, false, WKind::fronsdal), p).relative);
        }
        entries.push_back(entry("fronsdal_integrand", "W'(h)^2 = 1 + mu (h^2 + mu h + mu^2) / h^3",
                                "W'(h)^2 = mu (h^2 + mu h + mu^2) / h^3",
                                {{"paper_pullback", num(dp)}, {"alternative_pullback", num(da)}}));
    }
    json d;
    d["mu"] = num(mu);
    d["entries"] = std::move(entries);
    return d;
}

inline Outcome run_conformance(const Common& c, const CLI::App* sub) {
    json d = conformance_dossier(c.mu);
    Outcome out;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "id,quantity,value\n";
        for (const auto& e : d["entries"])
            for (const auto& [k, v] : e["measured"].items())
                os << e["id"].get<std::string>() << ',' << k << ',' << (v.is_null() ? "" : fmt9(v.get<double>())) << '\n';
        out.text = os.str();
        return out;
    }
    out.text = envelope("conformance", sub, std::move(d)).dump(2) + "\n";
    return out;
}

// ---- dispatch --------------------------------------------------------------

namespace detail {

// Appends entries of a key=value config file as flags, unless the flag was
// given on the command line.
inline void merge_config(std::vector<std::string>& args, const CLI::App& app) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.empty()) return;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return;  // CLI11 reports the bad subcommand
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line needs key=value: " + line);
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt || key == "config") throw UsageError("unknown config key: " + key);
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
        } else {
            args.push_back(flag + "=" + value);
        }
    }
}

}  // namespace detail

// Runs one subcommand. args excludes the program name. The report goes to
// `out` (or --output), diagnostics to `err`.
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Referee toolkit for the Schwarzschild, Hilbert-Droste and Kruskal-Szekeres constructions", "hdks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    VerifyOpts vo;
    TraceOpts to;
    TransformOpts xo;
    EmbedOpts eo;
    CurvatureOpts co;
    TopologyOpts po;

    auto* verify = app.add_subcommand("verify", "Vacuum (or flatness) residuals of a chart over a grid");
    add_common(verify, common, {"json", "csv"});
    verify->add_option("--chart", vo.chart, "Chart id")->required()->check(CLI::IsMember(chart_ids()));
    verify->add_option("--grid", vo.grid, "Axes name=min:max:count, comma separated (default: chart interior)");
    verify->add_option("--scheme", vo.scheme, "Christoffel route")->check(CLI::IsMember({"auto", "closed", "fd"}))
        ->capture_default_str();
    verify->add_option("--tol", vo.tol, "Residual threshold")->capture_default_str();

    auto* trace = app.add_subcommand("trace", "Integrate a geodesic");
    add_common(trace, common, {"json", "csv"});
    trace->add_option("--chart", to.chart, "Chart id")->check(CLI::IsMember(chart_ids()))->capture_default_str();
    trace->add_option("--init", to.init, "Start point and velocity, e.g. u=1,v=1,du=0,dv=-1")->required();
    trace->add_flag("--null", to.null, "Solve the first velocity component for a null start");
    trace->add_flag("--timelike", to.timelike, "Solve the first velocity component for g(v,v) = -1");
    trace->add_option("--affine-max", to.affine_max, "Affine parameter budget")->capture_default_str();
    trace->add_option("--events", to.events, "horizon,blowup or none")->capture_default_str();
    trace->add_option("--scheme", to.scheme, "Christoffel route")->check(CLI::IsMember({"auto", "closed", "fd"}))
        ->capture_default_str();

    auto* transform = app.add_subcommand("transform", "Map a point through a chart transition");
    add_common(transform, common, {"text", "json", "csv"});
    transform->get_option("--format")->default_str("text");
    transform->add_option("--from", xo.from, "Source chart")->capture_default_str();
    transform->add_option("--to", xo.to, "Target chart")->capture_default_str();
    transform->add_option("--region", xo.region, "Branch: KS region, or N1/N2 for the bridge");
    transform->add_option("--point", xo.point, "Coordinates, e.g. t=0,r=2")->required();

    auto* embed = app.add_subcommand("embed", "Embed a grid into flat 6-space and measure the pullback");
    add_common(embed, common, {"json", "csv"});
    embed->add_option("--map", eo.map, "kasner or fronsdal")->check(CLI::IsMember({"kasner", "fronsdal"}))
        ->capture_default_str();
    embed->add_option("--branch", eo.branch, "Fronsdal branch")->check(CLI::IsMember({"exterior", "interior", "both"}))
        ->capture_default_str();
    embed->add_flag("--mirror", eo.mirror, "Use the mirrored Fronsdal sheet");
    embed->add_option("--integrand", eo.integrand, "Fronsdal W' form")
        ->check(CLI::IsMember({"fronsdal", "fronsdal_paper"}))->capture_default_str();
    embed->add_option("--signature", eo.signature, "Kasner ambient signature")
        ->check(CLI::IsMember({"kasner", "conditions"}))->capture_default_str();
    embed->add_option("--target", eo.target, "Kasner chart metric")->check(CLI::IsMember({"derived", "printed"}))
        ->capture_default_str();
    embed->add_option("--grid", eo.grid, "Axes over (t, r|H, theta, phi)");
    embed->add_option("--tol", eo.tol, "Relative pullback threshold")->capture_default_str();

    auto* curvature = app.add_subcommand("curvature", "Sectional curvature over the KS plane");
    add_common(curvature, common, {"json", "csv"});
    curvature->add_option("--grid", co.grid, "Axes over (u, v)");
    curvature->add_option("--tol", co.tol, "Threshold on |S_KS - K_HD|")->capture_default_str();

    auto* topology = app.add_subcommand("topology", "Connectivity, Hausdorff and bridge queries");
    add_common(topology, common, {"json", "csv"});
    topology->add_option("--space", po.space, "Space")->check(CLI::IsMember({"schwarzschild", "hd", "ks", "er"}))
        ->capture_default_str();
    topology->add_option("--query", po.query, "Query")->check(CLI::IsMember({"connectivity", "hausdorff", "bridge"}))
        ->capture_default_str();
    topology->add_option("--from", po.from, "Start point, e.g. t=0,r=0.5");
    topology->add_option("--to", po.to, "End point, e.g. t=0,r=2");
    topology->add_option("--from-region", po.from_region, "KS region of the start point")->capture_default_str();
    topology->add_option("--to-region", po.to_region, "KS region of the end point")->capture_default_str();
    topology->add_option("--budget", po.budget, "Geodesic hops attempted")->capture_default_str();
    topology->add_option("--gluing", po.gluing, "doubled_origin, identity or er_bridge");
    topology->add_option("--sequences", po.sequences, "Approach sequences searched")->capture_default_str();
    topology->add_option("--variant", po.variant, "derived or paper")->capture_default_str();

    auto* conformance = app.add_subcommand("conformance", "Measure every printed-formula discrepancy");
    add_common(conformance, common, {"json", "csv"});

    try {
        detail::merge_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    if (transform->parsed() && transform->get_option("--format")->count() == 0) common.format = "text";
    if (!transform->parsed() && common.format == "text") common.format = "json";
    if (!(common.mu > 0.0)) {
        err << "error: --mu must be positive\n";
        return kUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    Outcome res;
    try {
        if (verify->parsed()) res = run_verify(common, vo, verify);
        else if (trace->parsed()) res = run_trace(common, to, trace);
        else if (transform->parsed()) res = run_transform(common, xo, transform);
        else if (embed->parsed()) res = run_embed(common, eo, embed);
        else if (curvature->parsed()) res = run_curvature(common, co, curvature);
        else if (topology->parsed()) res = run_topology(common, po, topology);
        else res = run_conformance(common, conformance);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const StepUnderflow& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const ToleranceNotMet& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const SingularMetric& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (common.output.empty()) {
        out << res.text;
    } else {
        std::ofstream f(common.output, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << common.output << '\n';
            return kUsage;
        }
        f << res.text;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "wall_clock_s=" << fmt9(secs) << '\n';
    return res.code;
}

}  // namespace hdks::cli
