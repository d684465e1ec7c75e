#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "hdks/errors.hpp"

namespace hdks {

// Kruskal-Szekeres profile functions for mass mu:
//   f(r) = (r - mu) exp(r/mu),   F(r) = (4 mu^2 / r) exp(-r/mu).
// f is strictly increasing from (0, inf) onto (-mu, inf) with f(mu) = 0.
class KsProfile {
public:
    explicit KsProfile(double mu) : mu_(mu) {
        if (!(mu > 0.0)) throw DomainError("KsProfile: mass must be positive");
    }

    double mass() const { return mu_; }

    double f(double r) const {
        check_r(r);
        return (r - mu_) * std::exp(r / mu_);
    }
    double df(double r) const { return (r / mu_) * std::exp(r / mu_); }
    double d2f(double r) const { return std::exp(r / mu_) * (1.0 / mu_ + r / (mu_ * mu_)); }

    double F(double r) const {
        check_r(r);
        return 4.0 * mu_ * mu_ / r * std::exp(-r / mu_);
    }
    // F'(r) / F(r)
    double dlogF(double r) const { return -(1.0 / r + 1.0 / mu_); }
    double dF(double r) const { return F(r) * dlogF(r); }

    // Inverse of f by safeguarded Newton inside a bracket that always
    // contains the root; bisection takes over if Newton leaves the bracket or
    // fails to settle within 50 iterations.
    double f_inv(double w) const {
        if (!(w > -mu_) || !std::isfinite(w)) {
            std::ostringstream os;
            os << "f_inv: w = " << w << " must exceed -mu = " << -mu_;
            throw DomainError(os.str());
        }
        if (w == 0.0) return mu_;
        double lo, hi;
        if (w < 0.0) {
            lo = 0.0;
            hi = mu_;
        } else {
            lo = mu_;
            hi = mu_ * (1.0 + std::log1p(w / mu_)) + mu_;
            while (raw_f(hi) < w) hi = mu_ + 2.0 * (hi - mu_);
        }
        // f ~ -mu + r^2 / (2 mu) near r = 0 gives a good start for w -> -mu.
        double r;
        if (w < 0.0)
            r = std::min(std::sqrt(2.0 * mu_ * (w + mu_)), 0.5 * (lo + hi));
        else
            r = 0.5 * (lo + hi);
        if (!(r > lo && r < hi)) r = 0.5 * (lo + hi);

        // a few ulps: Newton has converged once a step is this small
        constexpr double kRelTol = 4.0 * std::numeric_limits<double>::epsilon();
        for (int it = 0; it < 200; ++it) {
            const double fr = raw_f(r) - w;
            if (fr == 0.0) return r;
            if (fr < 0.0) lo = r; else hi = r;
            double next;
            const double d = df(r);
            if (it < 50 && d > 0.0) {
                next = r - fr / d;
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            } else {
                next = 0.5 * (lo + hi);
            }
            if (std::abs(next - r) <= kRelTol * std::max(next, std::numeric_limits<double>::min())) return next;
            if (hi - lo <= kRelTol * std::max(lo, std::numeric_limits<double>::min())) return 0.5 * (lo + hi);
            r = next;
        }
        return r;
    }

private:
    double raw_f(double r) const { return (r - mu_) * std::exp(r / mu_); }
    void check_r(double r) const {
        if (!(r > 0.0)) {
            std::ostringstream os;
            os << "KS profile needs r > 0, got " << r;
            throw DomainError(os.str());
        }
    }

    double mu_;
};

}  // namespace hdks
