#include "hyperrank/linalg.hpp"

#include "hyperrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace hyperrank {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
           << "x" << b.cols();
        throw InvalidInput(os.str());
    }
}

void require_inner(std::size_t lhs_cols, std::size_t rhs_rows, const char* op) {
    if (lhs_cols != rhs_rows) {
        std::ostringstream os;
        os << op << ": inner dimensions differ (" << lhs_cols << " vs " << rhs_rows << ")";
        throw InvalidInput(os.str());
    }
}

void require_finite(const DenseMatrix& m, const char* op) {
    if (!m.all_finite()) throw InvalidInput(std::string(op) + ": non-finite entry in input");
}

}  // namespace

// ---------------------------------------------------------------- DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw InvalidInput("DenseMatrix: dimensions must be >= 1");
    if (!std::isfinite(fill)) throw InvalidInput("DenseMatrix: non-finite fill value");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw InvalidInput("DenseMatrix::from_rows: no rows");
    const std::size_t nc = rows.begin()->size();
    DenseMatrix m(rows.size(), nc);
    std::size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != nc) throw InvalidInput("DenseMatrix::from_rows: ragged rows");
        std::copy(r.begin(), r.end(), m.row(i).begin());
        ++i;
    }
    require_finite(m, "DenseMatrix::from_rows");
    return m;
}

DenseMatrix DenseMatrix::column(std::span<const double> v) {
    DenseMatrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
}

Vector DenseMatrix::col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw InvalidInput("DenseMatrix::block: out of range");
    DenseMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        const double* src = data_.data() + (r0 + i) * cols_ + c0;
        std::copy(src, src + nc, b.row(i).begin());
    }
    return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
        throw InvalidInput("DenseMatrix::set_block: out of range");
    for (std::size_t i = 0; i < b.rows(); ++i) {
        auto src = b.row(i);
        std::copy(src.begin(), src.end(), data_.begin() + (r0 + i) * cols_ + c0);
    }
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
    require_same_shape(*this, o, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
    require_same_shape(*this, o, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
    for (double& x : data_) x *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

// --------------------------------------------------------------- SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
    if (rows == 0 || cols == 0) throw InvalidInput("SparseMatrix: dimensions must be >= 1");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
    SparseMatrix s(rows, cols);
    for (const auto& t : entries) {
        if (t.row >= rows || t.col >= cols) {
            std::ostringstream os;
            os << "SparseMatrix: coordinate (" << t.row << ", " << t.col << ") outside " << rows
               << "x" << cols;
            throw InvalidInput(os.str());
        }
        if (!std::isfinite(t.value)) throw InvalidInput("SparseMatrix: non-finite value");
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    s.col_idx_.reserve(entries.size());
    s.values_.reserve(entries.size());
    std::size_t k = 0;
    while (k < entries.size()) {
        const auto r = entries[k].row;
        const auto c = entries[k].col;
        double v = 0.0;
        for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k)
            v += entries[k].value;
        if (v != 0.0) {
            s.col_idx_.push_back(c);
            s.values_.push_back(v);
            ++s.row_ptr_[r + 1];
        }
    }
    std::partial_sum(s.row_ptr_.begin(), s.row_ptr_.end(), s.row_ptr_.begin());
    return s;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m, double drop_tol) {
    SparseMatrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (std::abs(r[j]) > drop_tol && r[j] != 0.0) {
                s.col_idx_.push_back(j);
                s.values_.push_back(r[j]);
            }
        }
        s.row_ptr_[i + 1] = s.values_.size();
    }
    return s;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw InvalidInput("SparseMatrix::at: out of range");
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            out.push_back({i, col_idx_[k], values_[k]});
    return out;
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(cols_, rows_);
    t.col_idx_.resize(nnz());
    t.values_.resize(nnz());
    for (std::size_t c : col_idx_) ++t.row_ptr_[c + 1];
    std::partial_sum(t.row_ptr_.begin(), t.row_ptr_.end(), t.row_ptr_.begin());
    std::vector<std::size_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t dst = next[col_idx_[k]]++;
            t.col_idx_[dst] = i;
            t.values_[dst] = values_[k];
        }
    }
    return t;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) = values_[k];
    return d;
}

// ------------------------------------------------------------------ RngStream

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

std::size_t RngStream::uniform_index(std::size_t n) {
    if (n == 0) throw InvalidInput("RngStream::uniform_index: empty range");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

// ------------------------------------------------------------------- products

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require_inner(a.cols(), b.rows(), "matmul");
    const std::size_t m = a.rows();
    const std::size_t p = a.cols();
    const std::size_t n = b.cols();
    DenseMatrix c(m, n);

    // Four rows of C share each streamed row of B; k and j are tiled so the
    // active slice of B stays in cache.
    constexpr std::size_t kTileK = 128;
    constexpr std::size_t kTileJ = 512;
    for (std::size_t j0 = 0; j0 < n; j0 += kTileJ) {
        const std::size_t j1 = std::min(n, j0 + kTileJ);
        for (std::size_t k0 = 0; k0 < p; k0 += kTileK) {
            const std::size_t k1 = std::min(p, k0 + kTileK);
            std::size_t i = 0;
            for (; i + 4 <= m; i += 4) {
                double* c0 = &c(i, 0);
                double* c1 = &c(i + 1, 0);
                double* c2 = &c(i + 2, 0);
                double* c3 = &c(i + 3, 0);
                for (std::size_t k = k0; k < k1; ++k) {
                    const double a0 = a(i, k);
                    const double a1 = a(i + 1, k);
                    const double a2 = a(i + 2, k);
                    const double a3 = a(i + 3, k);
                    const double* bk = b.row(k).data();
                    for (std::size_t j = j0; j < j1; ++j) {
                        const double bv = bk[j];
                        c0[j] += a0 * bv;
                        c1[j] += a1 * bv;
                        c2[j] += a2 * bv;
                        c3[j] += a3 * bv;
                    }
                }
            }
            for (; i < m; ++i) {
                double* ci = &c(i, 0);
                for (std::size_t k = k0; k < k1; ++k) {
                    const double aik = a(i, k);
                    const double* bk = b.row(k).data();
                    for (std::size_t j = j0; j < j1; ++j) ci[j] += aik * bk[j];
                }
            }
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    require_inner(a.rows(), b.rows(), "matmul_tn");
    return matmul(transpose(a), b);
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    require_inner(a.cols(), b.cols(), "matmul_nt");
    return matmul(a, transpose(b));
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
    require_inner(a.cols(), x.size(), "matvec");
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Vector matvec_t(const DenseMatrix& a, std::span<const double> x) {
    require_inner(a.rows(), x.size(), "matvec_t");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) axpy(x[i], a.row(i), y);
    return y;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    constexpr std::size_t kTile = 32;
    for (std::size_t i0 = 0; i0 < a.rows(); i0 += kTile)
        for (std::size_t j0 = 0; j0 < a.cols(); j0 += kTile)
            for (std::size_t i = i0; i < std::min(a.rows(), i0 + kTile); ++i)
                for (std::size_t j = j0; j < std::min(a.cols(), j0 + kTile); ++j) t(j, i) = a(i, j);
    return t;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

DenseMatrix matmul(const SparseMatrix& a, const DenseMatrix& b) {
    require_inner(a.cols(), b.rows(), "matmul(sparse, dense)");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        auto ci = c.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) axpy(vals[k], b.row(cols[k]), ci);
    }
    return c;
}

DenseMatrix matmul(const DenseMatrix& a, const SparseMatrix& b) {
    require_inner(a.cols(), b.rows(), "matmul(dense, sparse)");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto ci = c.row(i);
        for (std::size_t k = 0; k < ai.size(); ++k) {
            if (ai[k] == 0.0) continue;
            auto cols = b.row_cols(k);
            auto vals = b.row_values(k);
            for (std::size_t t = 0; t < cols.size(); ++t) ci[cols[t]] += ai[k] * vals[t];
        }
    }
    return c;
}

Vector matvec(const SparseMatrix& a, std::span<const double> x) {
    require_inner(a.cols(), x.size(), "matvec(sparse)");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * x[cols[k]];
        y[i] = s;
    }
    return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInput("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) {
    // Scaled accumulation so very large or tiny entries do not over/underflow.
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double v : x) {
        const double t = v / scale;
        s += t * t;
    }
    return scale * std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw InvalidInput("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// ------------------------------------------------------------------------ QR

QrFactors qr_factor(const DenseMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    if (rows < cols) throw InvalidInput("qr_factor: requires rows >= cols");
    require_finite(m, "qr_factor");

    // Work on columns as contiguous rows.
    DenseMatrix w = transpose(m);
    std::vector<Vector> reflectors(cols);
    DenseMatrix r(cols, cols);

    for (std::size_t k = 0; k < cols; ++k) {
        auto xk = w.row(k).subspan(k);
        const double alpha_abs = norm2(xk);
        Vector v(xk.begin(), xk.end());
        if (alpha_abs > 0.0) {
            const double alpha = xk[0] >= 0.0 ? -alpha_abs : alpha_abs;
            v[0] -= alpha;
            const double vn = norm2(v);
            if (vn > 0.0) {
                for (double& t : v) t /= vn;
                for (std::size_t j = k; j < cols; ++j) {
                    auto cj = w.row(j).subspan(k);
                    const double s = 2.0 * dot(v, cj);
                    axpy(-s, v, cj);
                }
            } else {
                v.assign(v.size(), 0.0);
            }
        } else {
            v.assign(v.size(), 0.0);
        }
        reflectors[k] = std::move(v);
        for (std::size_t j = k; j < cols; ++j) r(k, j) = w(j, k);
    }

    // Q = H_0 ... H_{cols-1} [I; 0], accumulated backwards, columns as rows.
    DenseMatrix qt(cols, rows);
    for (std::size_t j = 0; j < cols; ++j) qt(j, j) = 1.0;
    for (std::size_t kk = cols; kk-- > 0;) {
        const Vector& v = reflectors[kk];
        if (std::all_of(v.begin(), v.end(), [](double t) { return t == 0.0; })) continue;
        for (std::size_t j = kk; j < cols; ++j) {
            auto qj = qt.row(j).subspan(kk);
            const double s = 2.0 * dot(v, qj);
            axpy(-s, v, qj);
        }
    }

    for (std::size_t k = 0; k < cols; ++k) {
        if (r(k, k) < 0.0) {
            for (std::size_t j = k; j < cols; ++j) r(k, j) = -r(k, j);
            for (double& t : qt.row(k)) t = -t;
        }
    }
    return {transpose(qt), std::move(r)};
}

// ----------------------------------------------------------------------- SVD

namespace {

// Golub-Reinsch on a tall matrix. `a` is column-major rows x cols and is
// overwritten by U; `w` receives singular values, `v` (column-major cols x cols)
// the right vectors.
void golub_reinsch(std::vector<double>& a, std::size_t m, std::size_t n, Vector& w,
                   std::vector<double>& v) {
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[j * m + i]; };
    auto V = [&](std::size_t i, std::size_t j) -> double& { return v[j * n + i]; };
    constexpr double eps = std::numeric_limits<double>::epsilon();

    Vector rv1(n, 0.0);
    w.assign(n, 0.0);
    v.assign(n * n, 0.0);
    double g = 0.0;
    double scale = 0.0;
    double anorm = 0.0;
    std::size_t l = 0;

    // Householder reduction to bidiagonal form.
    for (std::size_t i = 0; i < n; ++i) {
        l = i + 1;
        rv1[i] = scale * g;
        g = 0.0;
        double s = 0.0;
        scale = 0.0;
        for (std::size_t k = i; k < m; ++k) scale += std::abs(A(k, i));
        if (scale != 0.0) {
            for (std::size_t k = i; k < m; ++k) {
                A(k, i) /= scale;
                s += A(k, i) * A(k, i);
            }
            double f = A(i, i);
            g = -std::copysign(std::sqrt(s), f);
            const double h = f * g - s;
            A(i, i) = f - g;
            for (std::size_t j = l; j < n; ++j) {
                s = 0.0;
                for (std::size_t k = i; k < m; ++k) s += A(k, i) * A(k, j);
                f = s / h;
                for (std::size_t k = i; k < m; ++k) A(k, j) += f * A(k, i);
            }
            for (std::size_t k = i; k < m; ++k) A(k, i) *= scale;
        }
        w[i] = scale * g;

        g = 0.0;
        s = 0.0;
        scale = 0.0;
        if (i + 1 != n) {
            for (std::size_t k = l; k < n; ++k) scale += std::abs(A(i, k));
            if (scale != 0.0) {
                for (std::size_t k = l; k < n; ++k) {
                    A(i, k) /= scale;
                    s += A(i, k) * A(i, k);
                }
                const double f = A(i, l);
                g = -std::copysign(std::sqrt(s), f);
                const double h = f * g - s;
                A(i, l) = f - g;
                for (std::size_t k = l; k < n; ++k) rv1[k] = A(i, k) / h;
                for (std::size_t j = l; j < m; ++j) {
                    s = 0.0;
                    for (std::size_t k = l; k < n; ++k) s += A(j, k) * A(i, k);
                    for (std::size_t k = l; k < n; ++k) A(j, k) += s * rv1[k];
                }
                for (std::size_t k = l; k < n; ++k) A(i, k) *= scale;
            }
        }
        anorm = std::max(anorm, std::abs(w[i]) + std::abs(rv1[i]));
    }

    // Right-hand transformations.
    for (std::size_t i = n; i-- > 0;) {
        if (i + 1 < n) {
            if (g != 0.0) {
                for (std::size_t j = l; j < n; ++j) V(j, i) = (A(i, j) / A(i, l)) / g;
                for (std::size_t j = l; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t k = l; k < n; ++k) s += A(i, k) * V(k, j);
                    for (std::size_t k = l; k < n; ++k) V(k, j) += s * V(k, i);
                }
            }
            for (std::size_t j = l; j < n; ++j) V(i, j) = V(j, i) = 0.0;
        }
        V(i, i) = 1.0;
        g = rv1[i];
        l = i;
    }

    // Left-hand transformations.
    for (std::size_t i = n; i-- > 0;) {
        l = i + 1;
        g = w[i];
        for (std::size_t j = l; j < n; ++j) A(i, j) = 0.0;
        if (g != 0.0) {
            g = 1.0 / g;
            for (std::size_t j = l; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = l; k < m; ++k) s += A(k, i) * A(k, j);
                const double f = (s / A(i, i)) * g;
                for (std::size_t k = i; k < m; ++k) A(k, j) += f * A(k, i);
            }
            for (std::size_t j = i; j < m; ++j) A(j, i) *= g;
        } else {
            for (std::size_t j = i; j < m; ++j) A(j, i) = 0.0;
        }
        A(i, i) += 1.0;
    }

    // Implicit-shift QR on the bidiagonal.
    const std::size_t cap = 100 * n;
    std::size_t total_iters = 0;
    for (std::size_t k = n; k-- > 0;) {
        for (;;) {
            bool flag = true;
            std::size_t nm = 0;
            std::size_t ll = k;
            for (;; --ll) {
                if (ll == 0 || std::abs(rv1[ll]) <= eps * anorm) {
                    flag = false;
                    break;
                }
                nm = ll - 1;
                if (std::abs(w[nm]) <= eps * anorm) break;
            }
            l = ll;
            if (flag) {
                // w[nm] is negligible: chase rv1[l] out with rotations.
                double c = 0.0;
                double s = 1.0;
                for (std::size_t i = l; i <= k; ++i) {
                    const double f = s * rv1[i];
                    rv1[i] = c * rv1[i];
                    if (std::abs(f) <= eps * anorm) break;
                    g = w[i];
                    double h = std::hypot(f, g);
                    w[i] = h;
                    h = 1.0 / h;
                    c = g * h;
                    s = -f * h;
                    double* cnm = &A(0, nm);
                    double* ci = &A(0, i);
                    for (std::size_t j = 0; j < m; ++j) {
                        const double y = cnm[j];
                        const double z = ci[j];
                        cnm[j] = y * c + z * s;
                        ci[j] = z * c - y * s;
                    }
                }
            }
            double z = w[k];
            if (l == k) {
                if (z < 0.0) {
                    w[k] = -z;
                    for (std::size_t j = 0; j < n; ++j) V(j, k) = -V(j, k);
                }
                break;
            }
            if (++total_iters > cap) {
                double off = 0.0;
                for (double e : rv1) off = std::max(off, std::abs(e));
                throw NotConverged("svd_small: no convergence within iteration cap", off);
            }

            double x = w[l];
            nm = k - 1;
            double y = w[nm];
            g = rv1[nm];
            double h = rv1[k];
            double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = std::hypot(f, 1.0);
            f = ((x - z) * (x + z) + h * ((y / (f + std::copysign(g, f))) - h)) / x;
            double c = 1.0;
            double s = 1.0;
            for (std::size_t j = l; j <= nm; ++j) {
                const std::size_t i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g = c * g;
                z = std::hypot(f, h);
                rv1[j] = z;
                c = f / z;
                s = h / z;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                {
                    double* vj = &V(0, j);
                    double* vi = &V(0, i);
                    for (std::size_t jj = 0; jj < n; ++jj) {
                        const double xv = vj[jj];
                        const double zv = vi[jj];
                        vj[jj] = xv * c + zv * s;
                        vi[jj] = zv * c - xv * s;
                    }
                }
                z = std::hypot(f, h);
                w[j] = z;
                if (z != 0.0) {
                    z = 1.0 / z;
                    c = f * z;
                    s = h * z;
                }
                f = c * g + s * y;
                x = c * y - s * g;
                {
                    double* aj = &A(0, j);
                    double* ai = &A(0, i);
                    for (std::size_t jj = 0; jj < m; ++jj) {
                        const double yv = aj[jj];
                        const double zv = ai[jj];
                        aj[jj] = yv * c + zv * s;
                        ai[jj] = zv * c - yv * s;
                    }
                }
            }
            rv1[l] = 0.0;
            rv1[k] = f;
            w[k] = x;
        }
    }
}

}  // namespace

SvdFactors svd_small(const DenseMatrix& m, const SvdOptions& opts) {
    require_finite(m, "svd_small");
    const bool wide = m.rows() < m.cols();
    const std::size_t rows = wide ? m.cols() : m.rows();
    const std::size_t cols = wide ? m.rows() : m.cols();
    if (cols > opts.max_small_side) {
        std::ostringstream os;
        os << "svd_small: small side " << cols << " exceeds bound " << opts.max_small_side;
        throw InvalidInput(os.str());
    }

    // Column-major copy of the tall orientation: for a tall input that is the
    // transpose's row-major data, for a wide input it is m's own storage.
    std::vector<double> a;
    if (wide) {
        a.assign(m.data().begin(), m.data().end());
    } else {
        const DenseMatrix t = transpose(m);
        a.assign(t.data().begin(), t.data().end());
    }
    Vector w;
    std::vector<double> v;
    golub_reinsch(a, rows, cols, w, v);

    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });

    // Tall-orientation factors: left (rows x cols) from a, right (cols x cols) from v.
    DenseMatrix left(rows, cols);
    DenseMatrix right(cols, cols);
    Vector sigma(cols);
    for (std::size_t jj = 0; jj < cols; ++jj) {
        const std::size_t j = order[jj];
        sigma[jj] = w[j];
        for (std::size_t i = 0; i < rows; ++i) left(i, jj) = a[j * rows + i];
        for (std::size_t i = 0; i < cols; ++i) right(i, jj) = v[j * cols + i];
    }

    DenseMatrix U = wide ? std::move(right) : std::move(left);
    DenseMatrix V = wide ? std::move(left) : std::move(right);
    for (std::size_t j = 0; j < cols; ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < U.rows(); ++i)
            if (std::abs(U(i, j)) > std::abs(best)) best = U(i, j);
        if (best < 0.0) {
            for (std::size_t i = 0; i < U.rows(); ++i) U(i, j) = -U(i, j);
            for (std::size_t i = 0; i < V.rows(); ++i) V(i, j) = -V(i, j);
        }
    }

    SvdFactors out{std::move(U), std::move(sigma), std::move(V), 0, 0, 0, 0, std::nullopt};
    out.target_rank = cols;
    out.sample_width = cols;
    return out;
}

// -------------------------------------------------------------- Gauss-Jordan

DenseMatrix invert_gauss_jordan(DenseMatrix m) {
    if (m.rows() != m.cols()) throw InvalidInput("invert_gauss_jordan: matrix must be square");
    require_finite(m, "invert_gauss_jordan");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (double x : m.data()) scale = std::max(scale, std::abs(x));
    const double tiny = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon();

    std::vector<std::size_t> swaps(n);
    Vector pivot_row(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        if (!(std::abs(m(p, k)) > tiny))
            throw SingularMatrix("invert_gauss_jordan: matrix is singular to working precision", k);
        swaps[k] = p;
        if (p != k) std::swap_ranges(m.row(k).begin(), m.row(k).end(), m.row(p).begin());

        const double inv = 1.0 / m(k, k);
        m(k, k) = 1.0;
        for (double& x : m.row(k)) x *= inv;
        std::copy(m.row(k).begin(), m.row(k).end(), pivot_row.begin());
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = m(i, k);
            if (f == 0.0) continue;
            m(i, k) = 0.0;
            double* ri = &m(i, 0);
            for (std::size_t j = 0; j < n; ++j) ri[j] -= f * pivot_row[j];
        }
    }
    // Row swaps of the input become column swaps of the inverse.
    for (std::size_t k = n; k-- > 0;) {
        if (swaps[k] == k) continue;
        for (std::size_t i = 0; i < n; ++i) std::swap(m(i, k), m(i, swaps[k]));
    }
    return m;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
    DenseMatrix g(rows, cols);
    for (double& x : g.data()) x = rng.normal();
    return g;
}

// ------------------------------------------------------------------------ I/O

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("Matrix Market: empty input");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw InvalidInput("Matrix Market: expected '%%MatrixMarket matrix coordinate ...' banner");
    field = lower(field);
    symmetry = lower(symmetry);
    const bool pattern = field == "pattern";
    if (!pattern && field != "real" && field != "integer")
        throw InvalidInput("Matrix Market: unsupported field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw InvalidInput("Matrix Market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream size_line(line);
    std::size_t rows = 0, cols = 0, entries = 0;
    if (!(size_line >> rows >> cols >> entries) || rows == 0 || cols == 0)
        throw InvalidInput("Matrix Market: bad size line");

    std::vector<Triplet> trips;
    trips.reserve(symmetric ? 2 * entries : entries);
    for (std::size_t k = 0; k < entries; ++k) {
        if (!std::getline(in, line)) throw InvalidInput("Matrix Market: truncated entry list");
        if (line.empty() || line[0] == '%') {
            --k;
            continue;
        }
        std::istringstream es(line);
        std::size_t i = 0, j = 0;
        double v = 1.0;
        if (!(es >> i >> j) || (!pattern && !(es >> v)))
            throw InvalidInput("Matrix Market: malformed entry '" + line + "'");
        if (i == 0 || j == 0 || i > rows || j > cols)
            throw InvalidInput("Matrix Market: index out of range in '" + line + "'");
        trips.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(trips));
}

SparseMatrix read_matrix_market(const std::string& path) {
    auto in = open_in(path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    out << std::setprecision(17);
    for (const auto& t : m.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
    auto out = open_out(path);
    write_matrix_market(out, m);
}

DenseMatrix read_dense(std::istream& in) {
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows == 0 || cols == 0)
        throw InvalidInput("dense text: bad 'rows cols' header");
    DenseMatrix m(rows, cols);
    for (double& x : m.data()) {
        if (!(in >> x)) throw InvalidInput("dense text: truncated or malformed values");
    }
    require_finite(m, "read_dense");
    return m;
}

DenseMatrix read_dense(const std::string& path) {
    auto in = open_in(path);
    return read_dense(in);
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out << (j ? " " : "") << r[j];
        out << '\n';
    }
}

void write_dense(const std::string& path, const DenseMatrix& m) {
    auto out = open_out(path);
    write_dense(out, m);
}

}  // namespace hyperrank
