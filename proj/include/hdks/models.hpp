#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "hdks/errors.hpp"

namespace hdks {

// Static spherically symmetric model -f dt^2 + g dh^2 + alpha^2 dOmega^2 with
// closed-form derivatives, defined on the open interval (lo, hi).
struct StaticModel {
    std::string name;
    double mass = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    std::function<double(double)> f, df, d2f;
    std::function<double(double)> g, dg;
    std::function<double(double)> alpha, dalpha, d2alpha;

    bool contains(double h) const { return h > lo && h < hi; }

    void require(double h) const {
        if (!contains(h)) {
            std::ostringstream os;
            os << name << ": h = " << h << " outside (" << lo << ", " << hi << ")";
            throw DomainError(os.str());
        }
    }
};

// f = 1 - mu/h, g = 1/f, alpha = h on the exterior h > mu.
inline StaticModel hd_model(double mu) {
    StaticModel m;
    m.name = "hd";
    m.mass = mu;
    m.lo = mu;
    m.f = [mu](double h) { return 1.0 - mu / h; };
    m.df = [mu](double h) { return mu / (h * h); };
    m.d2f = [mu](double h) { return -2.0 * mu / (h * h * h); };
    m.g = [mu](double h) { return h / (h - mu); };
    m.dg = [mu](double h) { return -mu / ((h - mu) * (h - mu)); };
    m.alpha = [](double h) { return h; };
    m.dalpha = [](double) { return 1.0; };
    m.d2alpha = [](double) { return 0.0; };
    return m;
}

// f = (h - mu)/(h + mu), g = 1/f, alpha = h + mu.
inline StaticModel uniquely2_model(double mu) {
    StaticModel m;
    m.name = "uniquely2";
    m.mass = mu;
    m.lo = mu;
    m.f = [mu](double h) { return (h - mu) / (h + mu); };
    m.df = [mu](double h) { return 2.0 * mu / ((h + mu) * (h + mu)); };
    m.d2f = [mu](double h) { return -4.0 * mu / ((h + mu) * (h + mu) * (h + mu)); };
    m.g = [mu](double h) { return (h + mu) / (h - mu); };
    m.dg = [mu](double h) { return -2.0 * mu / ((h - mu) * (h - mu)); };
    m.alpha = [mu](double h) { return h + mu; };
    m.dalpha = [](double) { return 1.0; };
    m.d2alpha = [](double) { return 0.0; };
    return m;
}

// Unimodular model: alpha = (3h + mu^3)^(1/3), f = 1 - mu/alpha and
// f g alpha^4 = 1, on h > 0.
inline StaticModel unimodular_model(double mu) {
    StaticModel m;
    m.name = "schwarzschild_unimodular";
    m.mass = mu;
    m.lo = 0.0;
    const double mu3 = mu * mu * mu;
    auto a = [mu3](double h) { return std::cbrt(3.0 * h + mu3); };
    m.alpha = a;
    m.dalpha = [a](double h) { const double x = a(h); return 1.0 / (x * x); };
    m.d2alpha = [a](double h) { return -2.0 * std::pow(a(h), -5.0); };
    m.f = [a, mu](double h) { return 1.0 - mu / a(h); };
    m.df = [a, mu](double h) { return mu * std::pow(a(h), -4.0); };
    m.d2f = [a, mu](double h) { return -4.0 * mu * std::pow(a(h), -7.0); };
    m.g = [a, mu](double h) {
        const double x = a(h);
        return 1.0 / (x * x * x * x * (1.0 - mu / x));
    };
    m.dg = [a, mu](double h) {
        const double x = a(h);
        const double f = 1.0 - mu / x;
        const double d = x * x * x * x * f;
        return -(4.0 * x * f + mu) / (d * d);
    };
    return m;
}

inline StaticModel model_by_name(const std::string& name, double mu) {
    if (name == "hd") return hd_model(mu);
    if (name == "uniquely2") return uniquely2_model(mu);
    if (name == "schwarzschild_unimodular" || name == "unimodular") return unimodular_model(mu);
    throw DomainError("unknown static model: " + name);
}

}  // namespace hdks
