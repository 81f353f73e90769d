#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hyperrank {

using Vector = std::vector<double>;

// Dense real matrix, contiguous row-major storage. Always at least 1x1.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    // Column vector (n x 1).
    static DenseMatrix column(std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Vector col(std::size_t j) const;

    // Copy of the nr x nc block starting at (r0, c0).
    DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);

    bool all_finite() const noexcept;

    DenseMatrix& operator+=(const DenseMatrix& o);
    DenseMatrix& operator-=(const DenseMatrix& o);
    DenseMatrix& operator*=(double s) noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Sparse real matrix. Coordinate list at the interface, compressed rows inside.
// Coordinates are unique and every stored value is finite and nonzero.
class SparseMatrix {
public:
    SparseMatrix(std::size_t rows, std::size_t cols);

    // Duplicate coordinates are summed; entries that end up zero are dropped.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<Triplet> entries);
    // Keeps entries with |value| > drop_tol.
    static SparseMatrix from_dense(const DenseMatrix& m, double drop_tol = 0.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    // Value at (i, j); zero when not stored.
    double at(std::size_t i, std::size_t j) const;

    std::vector<Triplet> triplets() const;
    SparseMatrix transpose() const;
    DenseMatrix to_dense() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

// Seeded Gaussian sample stream. Same seed, same build => same samples.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    static constexpr const char* algorithm() noexcept { return "mt19937_64+std::normal_distribution"; }

    double normal();
    double uniform();  // [0, 1)
    std::size_t uniform_index(std::size_t n);  // [0, n)
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// U (rows x r), singular values (r, non-increasing), V (cols x r).
// The metadata fields are filled by the randomized driver; svd_small leaves
// them describing a full deterministic factorization.
struct SvdFactors {
    DenseMatrix U;
    Vector sigma;
    DenseMatrix V;
    std::size_t target_rank = 0;
    std::size_t sample_width = 0;
    std::size_t power_iters = 0;
    std::size_t oversample = 0;
    std::optional<double> achieved_residual;
};

struct QrFactors {
    DenseMatrix Q;  // rows x cols, orthonormal columns
    DenseMatrix R;  // cols x cols, upper triangular, non-negative diagonal
};

// --- products and norms -----------------------------------------------------

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);  // a^T b
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);  // a b^T
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_t(const DenseMatrix& a, std::span<const double> x);  // a^T x
DenseMatrix transpose(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);

DenseMatrix matmul(const SparseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul(const DenseMatrix& a, const SparseMatrix& b);
Vector matvec(const SparseMatrix& a, std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// --- factorizations ----------------------------------------------------------

// Householder QR of a tall matrix (rows >= cols). Rank deficiency is allowed.
QrFactors qr_factor(const DenseMatrix& m);

struct SvdOptions {
    std::size_t max_small_side = 4096;
};

// Golub-Kahan bidiagonalization followed by implicit-shift QR sweeps.
// Thin factors: r = min(rows, cols). Each U column has its largest-magnitude
// entry non-negative.
SvdFactors svd_small(const DenseMatrix& m, const SvdOptions& opts = {});

// Gauss-Jordan inverse with partial pivoting.
DenseMatrix invert_gauss_jordan(DenseMatrix m);

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng);

// --- text formats ------------------------------------------------------------

// Matrix Market "coordinate" (real, integer or pattern; general or symmetric).
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::string& path, const SparseMatrix& m);

// "rows cols" header followed by row-major values.
DenseMatrix read_dense(std::istream& in);
DenseMatrix read_dense(const std::string& path);
void write_dense(std::ostream& out, const DenseMatrix& m);
void write_dense(const std::string& path, const DenseMatrix& m);

}  // namespace hyperrank
