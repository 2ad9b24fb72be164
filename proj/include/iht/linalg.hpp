#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace iht {

using Vector = std::vector<double>;

inline void check_finite(const Vector& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

/// Dense row-major matrix. Summation order in all products is fixed
/// (left-to-right per row) so repeated runs are bit-identical.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {
        if (r == 0 || c == 0) throw std::invalid_argument("Matrix: zero dimension");
    }
    Matrix(std::size_t r, std::size_t c, std::vector<double> entries)
        : rows(r), cols(c), data(std::move(entries)) {
        if (r == 0 || c == 0) throw std::invalid_argument("Matrix: zero dimension");
        if (data.size() != r * c) throw std::invalid_argument("Matrix: entry count mismatch");
        check_finite(data, "Matrix");
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vector& a) { return dot(a, a); }
inline double norm2(const Vector& a) { return std::sqrt(norm_sq(a)); }

inline Vector matvec(const Matrix& A, const Vector& x) {
    if (A.cols != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(A.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = &A.data[i * A.cols];
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline Vector matvec_transpose(const Matrix& A, const Vector& y) {
    if (A.rows != y.size()) throw std::invalid_argument("matvec_transpose: dimension mismatch");
    Vector x(A.cols);
    for (std::size_t j = 0; j < A.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i) s += A.data[i * A.cols + j] * y[i];
        x[j] = s;
    }
    return x;
}

/// A^T A, accumulated row by row.
inline Matrix gram(const Matrix& A) {
    Matrix G(A.cols, A.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = &A.data[i * A.cols];
        for (std::size_t j = 0; j < A.cols; ++j) {
            double aij = row[j];
            if (aij == 0.0) continue;
            double* gj = &G.data[j * A.cols];
            for (std::size_t k = 0; k < A.cols; ++k) gj[k] += aij * row[k];
        }
    }
    return G;
}

struct SpectralEstimate {
    double value = 0.0;
    bool converged = true;
};

/// Largest eigenvalue of A^T A (= sigma_max(A)^2) by power iteration with a
/// deterministic all-ones start. Zero matrix returns 0.
inline SpectralEstimate spectral_norm_sq(const Matrix& A, double tol = 1e-10,
                                         int max_iters = 10000) {
    if (tol <= 0.0) throw std::invalid_argument("spectral_norm_sq: tol must be positive");
    Vector x(A.cols, 1.0);
    Vector ax = matvec(A, x);
    double num = norm_sq(ax);
    if (num == 0.0) {
        bool all_zero = std::all_of(A.data.begin(), A.data.end(), [](double v) { return v == 0.0; });
        if (all_zero) return {0.0, true};
    }
    double lambda = num / norm_sq(x);
    for (int it = 0; it < max_iters; ++it) {
        Vector y = matvec_transpose(A, ax);
        double ny = norm2(y);
        if (ny == 0.0) return {lambda, true};
        for (double& v : y) v /= ny;
        x = std::move(y);
        ax = matvec(A, x);
        double next = norm_sq(ax);  // ||x|| == 1
        if (std::abs(next - lambda) <= tol * std::max(std::abs(next), 1e-300)) {
            return {next, true};
        }
        lambda = next;
    }
    return {lambda, false};
}

/// Least-squares fit restricted to a column subset. Householder QR with
/// column pivoting; columns whose pivot falls below 1e-12 times the largest
/// pivot get a zero coefficient. Empty support returns the zero vector.
inline Vector least_squares_on_support(const Matrix& A, const Vector& f,
                                       const std::vector<std::size_t>& support) {
    if (A.rows != f.size()) throw std::invalid_argument("least_squares_on_support: dimension mismatch");
    Vector u(A.cols, 0.0);
    const std::size_t k = support.size();
    if (k == 0) return u;
    for (std::size_t idx : support)
        if (idx >= A.cols) throw std::invalid_argument("least_squares_on_support: index out of range");

    const std::size_t m = A.rows;
    // B = A restricted to the support columns, column-major for the factorization.
    std::vector<double> B(m * k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < m; ++i) B[j * m + i] = A(i, support[j]);
    Vector rhs = f;
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);

    const std::size_t steps = std::min(m, k);
    std::size_t rank = 0;
    double first_pivot = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
        // Pivot: remaining column with the largest trailing norm.
        std::size_t best = j;
        double best_norm = 0.0;
        for (std::size_t c = j; c < k; ++c) {
            double s = 0.0;
            for (std::size_t i = j; i < m; ++i) s += B[c * m + i] * B[c * m + i];
            if (s > best_norm) {
                best_norm = s;
                best = c;
            }
        }
        if (best != j) {
            for (std::size_t i = 0; i < m; ++i) std::swap(B[best * m + i], B[j * m + i]);
            std::swap(perm[best], perm[j]);
        }
        double colnorm = std::sqrt(best_norm);
        if (j == 0) first_pivot = colnorm;
        if (colnorm <= 1e-12 * first_pivot) break;

        // Householder reflector for column j.
        double alpha = (B[j * m + j] >= 0.0) ? -colnorm : colnorm;
        std::vector<double> v(m - j);
        v[0] = B[j * m + j] - alpha;
        for (std::size_t i = j + 1; i < m; ++i) v[i - j] = B[j * m + i];
        double vnorm_sq = 0.0;
        for (double t : v) vnorm_sq += t * t;
        B[j * m + j] = alpha;
        for (std::size_t i = j + 1; i < m; ++i) B[j * m + i] = 0.0;
        if (vnorm_sq > 0.0) {
            for (std::size_t c = j + 1; c < k; ++c) {
                double s = 0.0;
                for (std::size_t i = j; i < m; ++i) s += v[i - j] * B[c * m + i];
                s = 2.0 * s / vnorm_sq;
                for (std::size_t i = j; i < m; ++i) B[c * m + i] -= s * v[i - j];
            }
            double s = 0.0;
            for (std::size_t i = j; i < m; ++i) s += v[i - j] * rhs[i];
            s = 2.0 * s / vnorm_sq;
            for (std::size_t i = j; i < m; ++i) rhs[i] -= s * v[i - j];
        }
        rank = j + 1;
    }

    // Back substitution on the leading rank x rank triangle.
    Vector y(k, 0.0);
    for (std::size_t jj = rank; jj-- > 0;) {
        double s = rhs[jj];
        for (std::size_t c = jj + 1; c < rank; ++c) s -= B[c * m + jj] * y[c];
        y[jj] = s / B[jj * m + jj];
    }
    for (std::size_t j = 0; j < k; ++j) u[support[perm[j]]] = y[j];
    return u;
}

}  // namespace iht
