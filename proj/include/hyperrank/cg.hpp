#pragma once

#include "hyperrank/error.hpp"
#include "hyperrank/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace hyperrank {

// Matrix-free operator: out = X * in. `out` has the same length as `in`.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

// The returned operators keep a reference to the matrix.
LinearOperator dense_operator(const DenseMatrix& x);
LinearOperator sparse_operator(const SparseMatrix& x);

struct CgConfig {
    double rel_tolerance = 1e-8;
    // 0 means "dimension of the system".
    std::size_t max_iters = 0;
    // Starting iterate f0; zero vector when absent.
    std::optional<Vector> initial;
    // Probe the operator for symmetry before iterating (two extra products).
    bool check_symmetry = false;
    std::uint64_t probe_seed = 0;
};

// View of the iteration after step i: f_i, r_i, p_{i-1} (the direction just
// used), alpha_i and beta_i.
struct CgState {
    std::span<const double> iterate;
    std::span<const double> residual;
    std::span<const double> direction;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iteration = 0;
};

using CgObserver = std::function<void(const CgState&)>;

struct CgResult {
    Vector f;
    std::size_t iterations = 0;
    // ||b - X f|| recomputed from the final iterate, and relative to ||b||.
    double residual_norm = 0.0;
    double final_residual = 0.0;
};

class CgNotConverged : public NotConverged {
public:
    CgNotConverged(const std::string& what, double residual, Vector best)
        : NotConverged(what, residual), best_(std::move(best)) {}

    // Iterate with the smallest recurrence residual seen.
    const Vector& best_iterate() const noexcept { return best_; }

private:
    Vector best_;
};

// Solves X f = theta / (1 + theta) * y for symmetric positive definite X.
CgResult cg_solve(const LinearOperator& x, std::span<const double> y, double theta,
                  const CgConfig& cfg = {}, const CgObserver& observer = {});

// Solves X f = b.
CgResult cg_solve_rhs(const LinearOperator& x, std::span<const double> b, const CgConfig& cfg = {},
                      const CgObserver& observer = {});

}  // namespace hyperrank
