#pragma once

// Small dense linear algebra used by the fitters: row-major matrices,
// Householder QR least squares with column equilibration, and a damped
// Cholesky solve for Gauss-Newton normal equations. Problem sizes here are
// tens of rows/columns, so simplicity beats blocking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace revkin::detail {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct LeastSquaresResult {
    std::vector<double> x;
    double condition_estimate = 0.0;  // max|R_ii| / min|R_ii| of the equilibrated R
    bool rank_deficient = false;
};

/// Householder QR least-squares min ||A x - b||_2, rows >= cols.
/// Columns are equilibrated to unit 2-norm first; the condition estimate is
/// the diagonal ratio of the equilibrated R factor. One pass of iterative
/// refinement sharpens consistent (zero-residual) systems.
inline LeastSquaresResult qr_least_squares(const Matrix& a, const std::vector<double>& b) {
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;
    LeastSquaresResult out;
    out.x.assign(n, 0.0);
    if (n == 0 || m == 0) return out;

    std::vector<double> col_scale(n, 1.0);
    // Factored copy: R on and above the diagonal, Householder vector tails
    // below it; vdiag holds each vector's leading component.
    Matrix qr(m, n);
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) norm += a.at(i, j) * a.at(i, j);
        norm = std::sqrt(norm);
        col_scale[j] = (norm > 0.0) ? norm : 1.0;
        for (std::size_t i = 0; i < m; ++i) qr.at(i, j) = a.at(i, j) / col_scale[j];
    }

    const std::size_t kmax = std::min(m, n);
    std::vector<double> beta(kmax, 0.0);
    std::vector<double> vdiag(kmax, 0.0);
    for (std::size_t k = 0; k < kmax; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += qr.at(i, k) * qr.at(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = (qr.at(k, k) > 0.0) ? -norm : norm;
        const double vkk = qr.at(k, k) - alpha;
        qr.at(k, k) = alpha;
        double vnorm2 = vkk * vkk;
        for (std::size_t i = k + 1; i < m; ++i) vnorm2 += qr.at(i, k) * qr.at(i, k);
        if (vnorm2 == 0.0) continue;
        beta[k] = 2.0 / vnorm2;
        vdiag[k] = vkk;
        for (std::size_t j = k + 1; j < n; ++j) {
            double dot = vkk * qr.at(k, j);
            for (std::size_t i = k + 1; i < m; ++i) dot += qr.at(i, k) * qr.at(i, j);
            dot *= beta[k];
            qr.at(k, j) -= dot * vkk;
            for (std::size_t i = k + 1; i < m; ++i) qr.at(i, j) -= dot * qr.at(i, k);
        }
    }

    double rmax = 0.0;
    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kmax; ++k) {
        const double d = std::fabs(qr.at(k, k));
        rmax = std::max(rmax, d);
        rmin = std::min(rmin, d);
    }
    out.condition_estimate = (rmin > 0.0) ? rmax / rmin : std::numeric_limits<double>::infinity();
    out.rank_deficient = !(rmin > rmax * 1e-15);

    auto solve_once = [&](const std::vector<double>& rhs) {
        std::vector<double> y = rhs;
        for (std::size_t k = 0; k < kmax; ++k) {
            if (beta[k] == 0.0) continue;
            double dot = vdiag[k] * y[k];
            for (std::size_t i = k + 1; i < m; ++i) dot += qr.at(i, k) * y[i];
            dot *= beta[k];
            y[k] -= dot * vdiag[k];
            for (std::size_t i = k + 1; i < m; ++i) y[i] -= dot * qr.at(i, k);
        }
        std::vector<double> x(n, 0.0);
        for (std::size_t kk = n; kk-- > 0;) {
            if (kk >= m) continue;
            double s = y[kk];
            for (std::size_t j = kk + 1; j < n; ++j) s -= qr.at(kk, j) * x[j];
            const double d = qr.at(kk, kk);
            x[kk] = (d != 0.0) ? s / d : 0.0;
        }
        return x;
    };

    std::vector<double> x = solve_once(b);
    std::vector<double> resid(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < n; ++j) s -= (a.at(i, j) / col_scale[j]) * x[j];
        resid[i] = s;
    }
    const std::vector<double> d = solve_once(resid);
    for (std::size_t j = 0; j < n; ++j) x[j] += d[j];

    for (std::size_t j = 0; j < n; ++j) out.x[j] = x[j] / col_scale[j];
    return out;
}

/// Solves (H + damping*diag(H) + floor*I) x = g for symmetric positive
/// semi-definite H via Cholesky. Returns false if factorization fails.
inline bool solve_damped_spd(const Matrix& h, const std::vector<double>& g, double damping,
                             std::vector<double>& x) {
    const std::size_t n = h.rows;
    Matrix l(n, n);
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::fabs(h.at(i, i)));
    const double floor = 1e-30 + 1e-14 * diag_scale;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = h.at(i, j);
            if (i == j) v += damping * h.at(i, i) + floor;
            l.at(i, j) = v;
        }
    for (std::size_t j = 0; j < n; ++j) {
        double d = l.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        l.at(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            l.at(i, j) = s / d;
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = g[i];
        for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * x[k];
        x[i] = s / l.at(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l.at(k, ii) * x[k];
        x[ii] = s / l.at(ii, ii);
    }
    return true;
}

}  // namespace revkin::detail
