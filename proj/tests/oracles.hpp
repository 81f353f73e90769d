#pragma once

// Reference computations used only by tests. Everything here works on plain
// nested vectors so it shares no code path with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

inline Mat eye(std::size_t n) {
    Mat m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat c = zeros(a.size(), b[0].size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b[0].size(); ++j) {
            long double s = 0.0L;
            for (std::size_t k = 0; k < b.size(); ++k) s += static_cast<long double>(a[i][k]) * b[k][j];
            c[i][j] = static_cast<double>(s);
        }
    return c;
}

inline Vec mul(const Mat& a, const Vec& x) {
    Vec y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        long double s = 0.0L;
        for (std::size_t k = 0; k < x.size(); ++k) s += static_cast<long double>(a[i][k]) * x[k];
        y[i] = static_cast<double>(s);
    }
    return y;
}

inline Mat transpose(const Mat& a) {
    Mat t = zeros(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

// Gauss-Jordan on the augmented [A | I], full row pivoting, long double.
inline Mat inverse(const Mat& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> aug(n, std::vector<long double>(2 * n, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = 1.0L;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(aug[i][k]) > std::fabs(aug[p][k])) p = i;
        if (aug[p][k] == 0.0L) throw std::runtime_error("oracle::inverse: singular");
        std::swap(aug[p], aug[k]);
        const long double piv = aug[k][k];
        for (auto& x : aug[k]) x /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const long double f = aug[i][k];
            if (f == 0.0L) continue;
            for (std::size_t j = 0; j < 2 * n; ++j) aug[i][j] -= f * aug[k][j];
        }
    }
    Mat inv = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = static_cast<double>(aug[i][n + j]);
    return inv;
}

// Gaussian elimination with partial pivoting and back substitution.
inline Vec solve(const Mat& a, const Vec& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
        m[i][n] = b[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(m[i][k]) > std::fabs(m[p][k])) p = i;
        std::swap(m[p], m[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const long double f = m[i][k] / m[k][k];
            for (std::size_t j = k; j <= n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double s = m[i][n];
        for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
        x[i] = static_cast<double>(s / m[i][i]);
    }
    return x;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
inline Vec symmetric_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline Mat random_matrix(std::size_t r, std::size_t c, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Mat m = zeros(r, c);
    for (auto& row : m)
        for (auto& x : row) x = dist(gen);
    return m;
}

// Symmetric, strictly diagonally dominant: SPD and well conditioned.
inline Mat random_spd(std::size_t n, unsigned seed, double margin = 1.0) {
    Mat m = random_matrix(n, n, seed);
    Mat s = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s[i][j] = 0.5 * (m[i][j] + m[j][i]);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row += std::fabs(s[i][j]);
        s[i][i] = row + margin;
    }
    return s;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) d = std::max(d, std::fabs(a[i][j] - b[i][j]));
    return d;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

inline double frobenius(const Mat& a) {
    long double s = 0.0L;
    for (const auto& r : a)
        for (double x : r) s += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(s));
}

}  // namespace oracle
