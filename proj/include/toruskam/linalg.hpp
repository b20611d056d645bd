#ifndef TORUSKAM_LINALG_HPP
#define TORUSKAM_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "toruskam/errors.hpp"

namespace toruskam {

// Small dense row-major matrices for pointwise phase-space algebra.
struct DMat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    DMat() = default;
    DMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    static DMat identity(int n) {
        DMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    DMat transposed() const {
        DMat t(cols, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    // Max-row-sum norm (the paper's |M| convention).
    double norm() const {
        double best = 0;
        for (int r = 0; r < rows; ++r) {
            double s = 0;
            for (int c = 0; c < cols; ++c) s += std::abs((*this)(r, c));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double m = 0;
        for (double x : a) m = std::max(m, std::abs(x));
        return m;
    }
};

inline DMat operator*(const DMat& x, const DMat& y) {
    if (x.cols != y.rows) throw ShapeError("DMat mul");
    DMat z(x.rows, y.cols);
    for (int r = 0; r < x.rows; ++r)
        for (int k = 0; k < x.cols; ++k) {
            double v = x(r, k);
            if (v == 0.0) continue;
            for (int c = 0; c < y.cols; ++c) z(r, c) += v * y(k, c);
        }
    return z;
}

inline DMat operator+(const DMat& x, const DMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw ShapeError("DMat add");
    DMat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
    return z;
}

inline DMat operator-(const DMat& x, const DMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw ShapeError("DMat sub");
    DMat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] -= y.a[i];
    return z;
}

inline DMat operator*(const DMat& x, double s) {
    DMat z = x;
    for (double& v : z.a) v *= s;
    return z;
}

inline std::vector<double> operator*(const DMat& x, const std::vector<double>& v) {
    if (x.cols != static_cast<int>(v.size())) throw ShapeError("DMat vec mul");
    std::vector<double> y(x.rows, 0.0);
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) y[r] += x(r, c) * v[c];
    return y;
}

// LU with partial pivoting; returns the inverse. cond_limit guards against
// near-singular matrices (infinity-norm condition estimate).
inline DMat invert(const DMat& m, double cond_limit = 1e12) {
    if (m.rows != m.cols) throw ShapeError("invert: square matrix required");
    const int n = m.rows;
    DMat lu = m;
    DMat inv = DMat::identity(n);
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int p = col;
        double best = std::abs(lu(col, col));
        for (int r = col + 1; r < n; ++r)
            if (std::abs(lu(r, col)) > best) { best = std::abs(lu(r, col)); p = r; }
        if (best == 0.0) throw Error("invert: singular matrix");
        if (p != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(lu(p, c), lu(col, c));
                std::swap(inv(p, c), inv(col, c));
            }
        }
        double d = lu(col, col);
        for (int c = 0; c < n; ++c) { lu(col, c) /= d; inv(col, c) /= d; }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = lu(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                lu(r, c) -= f * lu(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    double cond = m.norm() * inv.norm();
    if (!(cond < cond_limit))
        throw Error("invert: condition number above guard");
    return inv;
}

// D2a-style rank-3 tensors: t[i][j][k] = d^2 f_i / dz_j dz_k.
struct DTen3 {
    int n0 = 0, n1 = 0, n2 = 0;
    std::vector<double> a;

    DTen3() = default;
    DTen3(int a0, int a1, int a2)
        : n0(a0), n1(a1), n2(a2),
          a(static_cast<std::size_t>(a0) * a1 * a2, 0.0) {}

    double& operator()(int i, int j, int k) {
        return a[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
    }
    double operator()(int i, int j, int k) const {
        return a[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
    }

    // result_i = sum_{jk} t_{ijk} u_j v_k
    std::vector<double> apply(const std::vector<double>& u,
                              const std::vector<double>& v) const {
        std::vector<double> out(n0, 0.0);
        for (int i = 0; i < n0; ++i) {
            double acc = 0;
            for (int j = 0; j < n1; ++j) {
                if (u[j] == 0.0) continue;
                for (int k = 0; k < n2; ++k) acc += (*this)(i, j, k) * u[j] * v[k];
            }
            out[i] = acc;
        }
        return out;
    }

    // The paper's derivative norm: max_i sum_{jk} |t_{ijk}| for vector-valued
    // f (n0 rows); callers handle the matrix-valued extension.
    double norm() const {
        double best = 0;
        for (int i = 0; i < n0; ++i) {
            double s = 0;
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) s += std::abs((*this)(i, j, k));
            best = std::max(best, s);
        }
        return best;
    }
};

}  // namespace toruskam

#endif
