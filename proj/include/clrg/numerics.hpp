#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "clrg/errors.hpp"

namespace clrg {

using Vector = std::vector<double>;

// Dense row-major matrix. Entries are expected to stay finite; the numeric
// routines below assume symmetry where documented and check it.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> vals)
        : rows_(rows), cols_(cols), data_(vals) {
        if (data_.size() != rows * cols)
            throw DimensionMismatch("matrix initializer size does not match rows*cols");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    bool is_symmetric(double tol = 1e-10) const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vector mul(const Vector& v) const {
        if (v.size() != cols_) throw DimensionMismatch("matrix-vector size mismatch");
        Vector out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    Matrix mul(const Matrix& b) const {
        if (cols_ != b.rows()) throw DimensionMismatch("matrix-matrix size mismatch");
        Matrix out(rows_, b.cols());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a * b(k, j);
            }
        return out;
    }

    Matrix operator-(const Matrix& b) const {
        if (rows_ != b.rows() || cols_ != b.cols())
            throw DimensionMismatch("matrix subtraction size mismatch");
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - b.data_[i];
        return out;
    }

    Matrix operator+(const Matrix& b) const {
        if (rows_ != b.rows() || cols_ != b.cols())
            throw DimensionMismatch("matrix addition size mismatch");
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + b.data_[i];
        return out;
    }

    Matrix scaled(double c) const {
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = c * data_[i];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot-product size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector subtraction size mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector add(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector addition size mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vector scaled(const Vector& v, double c) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i];
    return out;
}

namespace detail {

inline void require_symmetric(const Matrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw DimensionMismatch(std::string(who) + ": matrix is not square");
    if (!a.is_symmetric(1e-10))
        throw DimensionMismatch(std::string(who) + ": matrix is not symmetric within 1e-10");
}

// Lower-triangular Cholesky factor of a SPD matrix. Pivot tolerance 1e-12 so
// a near-singular second moment surfaces as NotPositiveDefinite (violated
// regularity condition) instead of silent garbage.
inline Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 1e-12)
            throw NotPositiveDefinite(
                "Assumption 1 (Regularity) violated: pivot " + std::to_string(d) +
                " <= 1e-12 at column " + std::to_string(j));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

}  // namespace detail

// Solves a*x = b for symmetric positive definite a via Cholesky; never forms
// the inverse.
inline Vector solve_spd(const Matrix& a, const Vector& b) {
    detail::require_symmetric(a, "solve_spd");
    if (b.size() != a.rows()) throw DimensionMismatch("solve_spd: rhs size mismatch");
    const Matrix l = detail::cholesky(a);
    const std::size_t n = b.size();
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

// Smallest eigenvalue of a symmetric matrix via the cyclic Jacobi method.
// Intended for the small dense matrices this library works with (d <~ 50).
inline double min_eigenvalue(const Matrix& a) {
    detail::require_symmetric(a, "min_eigenvalue");
    const std::size_t n = a.rows();
    if (n == 0) throw DimensionMismatch("min_eigenvalue: empty matrix");
    Matrix m = a;
    // symmetrize exactly so rotations stay consistent
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (std::sqrt(off) < 1e-12 * (1.0 + m.max_abs())) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(m(p, q)) < 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
    }
    double lmin = m(0, 0);
    for (std::size_t i = 1; i < n; ++i) lmin = std::min(lmin, m(i, i));
    return lmin;
}

// Uncentered second moments (1/n) X^T X, cross-moment (1/n) X^T y, and the
// feature mean. The mean-zero convention makes sigma the covariance; mu is
// still reported so callers can warn when it is far from zero.
inline std::tuple<Matrix, Vector, Vector> empirical_moments(const Matrix& x, const Vector& y) {
    const std::size_t n = x.rows(), d = x.cols();
    if (n == 0) throw EmptySample("empirical_moments: no samples");
    if (y.size() != n) throw DimensionMismatch("empirical_moments: label count mismatch");
    Matrix sigma(d, d);
    Vector rho(d, 0.0), mu(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xij = x(i, j);
            mu[j] += xij;
            rho[j] += xij * y[i];
            for (std::size_t k = j; k < d; ++k) sigma(j, k) += xij * x(i, k);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        mu[j] *= inv_n;
        rho[j] *= inv_n;
        for (std::size_t k = j; k < d; ++k) {
            sigma(j, k) *= inv_n;
            sigma(k, j) = sigma(j, k);  // exact symmetry by construction
        }
    }
    return {sigma, rho, mu};
}

// Componentwise projection onto the l-infinity ball of radius w_sup.
inline Vector clamp_linf(const Vector& v, double w_sup) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], -w_sup, w_sup);
    return out;
}

}  // namespace clrg
