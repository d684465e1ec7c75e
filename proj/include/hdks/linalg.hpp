#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

#include "hdks/errors.hpp"

namespace hdks {

inline constexpr std::size_t kMaxDim = 6;

// Fixed-capacity coordinate tuple. The tag keeps points and tangent vectors
// from being mixed up at call sites.
template <class Tag>
class CoordTuple {
public:
    CoordTuple() = default;
    explicit CoordTuple(std::size_t n) : n_(n) { assert(n <= kMaxDim); }
    CoordTuple(std::initializer_list<double> xs) : n_(xs.size()) {
        assert(xs.size() <= kMaxDim);
        std::copy(xs.begin(), xs.end(), c_.begin());
    }

    std::size_t size() const { return n_; }
    double& operator[](std::size_t i) { return c_[i]; }
    double operator[](std::size_t i) const { return c_[i]; }
    const double* begin() const { return c_.data(); }
    const double* end() const { return c_.data() + n_; }

    CoordTuple& operator+=(const CoordTuple& o) {
        for (std::size_t i = 0; i < n_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    CoordTuple& operator-=(const CoordTuple& o) {
        for (std::size_t i = 0; i < n_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    CoordTuple& operator*=(double s) {
        for (std::size_t i = 0; i < n_; ++i) c_[i] *= s;
        return *this;
    }
    friend CoordTuple operator+(CoordTuple a, const CoordTuple& b) { return a += b; }
    friend CoordTuple operator-(CoordTuple a, const CoordTuple& b) { return a -= b; }
    friend CoordTuple operator*(double s, CoordTuple a) { return a *= s; }
    friend CoordTuple operator*(CoordTuple a, double s) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i) m = std::max(m, std::abs(c_[i]));
        return m;
    }
    double norm2() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += c_[i] * c_[i];
        return s;
    }

    friend bool operator==(const CoordTuple& a, const CoordTuple& b) {
        if (a.n_ != b.n_) return false;
        for (std::size_t i = 0; i < a.n_; ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }

    // Reinterpret the components under another tag (e.g. a displacement
    // between two points used as a tangent guess).
    template <class Other>
    CoordTuple<Other> as() const {
        CoordTuple<Other> r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = c_[i];
        return r;
    }

private:
    std::array<double, kMaxDim> c_{};
    std::size_t n_ = 0;
};

using Point = CoordTuple<struct PointTag>;
using Tangent = CoordTuple<struct TangentTag>;

// Dense square matrix of dimension <= kMaxDim.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n) : n_(n) { assert(n <= kMaxDim); }

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diagonal(std::initializer_list<double> d) {
        Matrix m(d.size());
        std::size_t i = 0;
        for (double v : d) { m(i, i) = v; ++i; }
        return m;
    }

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i][j]; }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) a_[i][j] += o.a_[i][j];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) a_[i][j] -= o.a_[i][j];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) a_[i][j] *= s;
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) m = std::max(m, std::abs(a_[i][j]));
        return m;
    }

    double quadratic(const Tangent& x, const Tangent& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) s += a_[i][j] * x[i] * y[j];
        return s;
    }

private:
    std::array<std::array<double, kMaxDim>, kMaxDim> a_{};
    std::size_t n_ = 0;
};

// LU factorisation with partial pivoting; returns {determinant, inverse}.
// Throws SingularMetric when a pivot vanishes exactly.
inline std::pair<double, Matrix> det_and_inverse(const Matrix& m) {
    const std::size_t n = m.size();
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw SingularMetric("matrix is singular");
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(a(piv, k), a(col, k));
                std::swap(inv(piv, k), inv(col, k));
            }
            det = -det;
        }
        const double p = a(col, col);
        det *= p;
        for (std::size_t k = 0; k < n; ++k) {
            a(col, k) /= p;
            inv(col, k) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a(r, k) -= f * a(col, k);
                inv(r, k) -= f * inv(col, k);
            }
        }
    }
    return {det, inv};
}

inline double determinant(const Matrix& m) {
    const std::size_t n = m.size();
    Matrix a = m;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t k = col; k < n; ++k) a(r, k) -= f * a(col, k);
        }
    }
    return det;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::array<double, kMaxDim> symmetric_eigenvalues(const Matrix& m) {
    const std::size_t n = m.size();
    Matrix a = m;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30 * (1.0 + a.max_abs() * a.max_abs())) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, kMaxDim> ev{};
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.begin() + static_cast<std::ptrdiff_t>(n));
    return ev;
}

// Number of negative eigenvalues (the index of a non-degenerate metric).
inline int metric_index(const Matrix& g) {
    const auto ev = symmetric_eigenvalues(g);
    int neg = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (ev[i] < 0.0) ++neg;
    return neg;
}

// Connection coefficients stored as gamma[k](i, j) = Gamma^k_{ij}.
struct Christoffel {
    std::size_t dim = 0;
    std::array<Matrix, kMaxDim> gamma{};

    explicit Christoffel(std::size_t n = 0) : dim(n) {
        for (auto& m : gamma) m = Matrix(n);
    }
    double operator()(std::size_t k, std::size_t i, std::size_t j) const { return gamma[k](i, j); }
    double& operator()(std::size_t k, std::size_t i, std::size_t j) { return gamma[k](i, j); }

    Christoffel& operator+=(const Christoffel& o) {
        for (std::size_t k = 0; k < dim; ++k) gamma[k] += o.gamma[k];
        return *this;
    }
    Christoffel& operator-=(const Christoffel& o) {
        for (std::size_t k = 0; k < dim; ++k) gamma[k] -= o.gamma[k];
        return *this;
    }
    Christoffel& operator*=(double s) {
        for (std::size_t k = 0; k < dim; ++k) gamma[k] *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t k = 0; k < dim; ++k) m = std::max(m, gamma[k].max_abs());
        return m;
    }
};

// First partial derivatives of the metric: dg[k](i, j) = d g_ij / d x^k.
struct MetricGradient {
    std::size_t dim = 0;
    std::array<Matrix, kMaxDim> dg{};

    explicit MetricGradient(std::size_t n = 0) : dim(n) {
        for (auto& m : dg) m = Matrix(n);
    }
};

// Max componentwise difference of two connection arrays.
inline double max_abs_diff(const Christoffel& a, const Christoffel& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.dim; ++k) m = std::max(m, (a.gamma[k] - b.gamma[k]).max_abs());
    return m;
}

}  // namespace hdks
