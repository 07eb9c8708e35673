// Minimal dense complex matrix support for desk-scale operator algebra
// (generators, transforms, multiplier maps). Row-major storage.

#pragma once

#include <cmath>
#include <span>

#include "qdes/common.hpp"

namespace qdes {

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<cdouble> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, cdouble{0.0, 0.0}) {}

    cdouble& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const cdouble& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Matrix adjoint(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = std::conj(m(i, j));
    return out;
}

inline Matrix matmul(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw usage_error("matmul: shape mismatch");
    Matrix out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const cdouble v = x(i, k);
            if (v == cdouble{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

inline std::vector<cdouble> matvec(const Matrix& m, std::span<const cdouble> v) {
    if (m.cols != v.size()) throw usage_error("matvec: shape mismatch");
    std::vector<cdouble> out(m.rows, cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < m.rows; ++i) {
        cdouble acc{0.0, 0.0};
        const cdouble* row = m.a.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

inline Matrix matpow(const Matrix& m, int p) {
    if (m.rows != m.cols) throw usage_error("matpow: matrix must be square");
    Matrix out = Matrix::identity(m.rows);
    for (int i = 0; i < p; ++i) out = matmul(out, m);
    return out;
}

inline Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows * y.rows, x.cols * y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            for (std::size_t p = 0; p < y.rows; ++p)
                for (std::size_t q = 0; q < y.cols; ++q)
                    out(i * y.rows + p, j * y.cols + q) = x(i, j) * y(p, q);
    return out;
}

inline double max_abs_diff(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw usage_error("max_abs_diff: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) d = std::max(d, std::abs(x.a[i] - y.a[i]));
    return d;
}

// max |(U^dag U - I)_{ij}|
inline double unitarity_residual(const Matrix& u) {
    return max_abs_diff(matmul(adjoint(u), u), Matrix::identity(u.cols));
}

inline double vec_norm(std::span<const cdouble> v) {
    double n2 = 0.0;
    for (const auto& x : v) n2 += std::norm(x);
    return std::sqrt(n2);
}

inline cdouble vec_dot(std::span<const cdouble> bra, std::span<const cdouble> ket) {
    if (bra.size() != ket.size()) throw usage_error("vec_dot: length mismatch");
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < bra.size(); ++i) acc += std::conj(bra[i]) * ket[i];
    return acc;
}

}  // namespace qdes
