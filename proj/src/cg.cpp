#include "hyperrank/cg.hpp"

#include <cmath>
#include <sstream>

namespace hyperrank {

LinearOperator dense_operator(const DenseMatrix& x) {
    if (x.rows() != x.cols()) throw InvalidInput("dense_operator: matrix must be square");
    return [&x](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = dot(x.row(i), in);
    };
}

LinearOperator sparse_operator(const SparseMatrix& x) {
    if (x.rows() != x.cols()) throw InvalidInput("sparse_operator: matrix must be square");
    return [&x](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto cols = x.row_cols(i);
            auto vals = x.row_values(i);
            double s = 0.0;
            for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * in[cols[k]];
            out[i] = s;
        }
    };
}

namespace {

void check_symmetric(const LinearOperator& x, std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    Vector u(n), v(n), xu(n), xv(n);
    for (auto& t : u) t = rng.normal();
    for (auto& t : v) t = rng.normal();
    x(u, xu);
    x(v, xv);
    const double lhs = dot(u, xv);
    const double rhs = dot(v, xu);
    const double scale = norm2(u) * norm2(xv) + norm2(v) * norm2(xu);
    if (std::abs(lhs - rhs) > 1e-10 * scale)
        throw InvalidInput("cg_solve: operator failed the symmetry probe");
}

}  // namespace

CgResult cg_solve_rhs(const LinearOperator& x, std::span<const double> b, const CgConfig& cfg,
                      const CgObserver& observer) {
    const std::size_t n = b.size();
    if (n == 0) throw InvalidInput("cg_solve: empty right-hand side");
    if (!(cfg.rel_tolerance > 0.0)) throw InvalidInput("cg_solve: rel_tolerance must be > 0");
    if (cfg.initial && cfg.initial->size() != n)
        throw InvalidInput("cg_solve: initial iterate has the wrong length");
    for (double t : b)
        if (!std::isfinite(t)) throw InvalidInput("cg_solve: non-finite right-hand side");
    if (cfg.check_symmetry) check_symmetric(x, n, cfg.probe_seed);

    const std::size_t max_iters = cfg.max_iters == 0 ? n : cfg.max_iters;
    const double b_norm = norm2(b);

    CgResult out;
    out.f = cfg.initial.value_or(Vector(n, 0.0));
    if (b_norm == 0.0) {
        out.f.assign(n, 0.0);
        return out;
    }

    Vector r(b.begin(), b.end());
    Vector q(n);
    x(out.f, q);
    axpy(-1.0, q, r);  // r0 = b - X f0
    Vector p = r;      // p0 = r0
    double rr = dot(r, r);
    const double target = cfg.rel_tolerance * b_norm;

    Vector best = out.f;
    double best_res = std::sqrt(rr);
    std::size_t it = 0;
    while (std::sqrt(rr) > target) {
        if (it == max_iters) {
            std::ostringstream os;
            os << "cg_solve: no convergence in " << max_iters << " iterations (relative residual "
               << best_res / b_norm << ")";
            throw CgNotConverged(os.str(), best_res / b_norm, std::move(best));
        }
        ++it;
        x(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw NumericalFailure("cg_solve: operator is not positive definite");
        const double alpha = rr / pq;
        axpy(alpha, p, out.f);   // f_i = f_{i-1} + alpha_i p_{i-1}
        axpy(-alpha, q, r);      // r_i = r_{i-1} - alpha_i X p_{i-1}
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        if (observer) observer(CgState{out.f, r, p, alpha, beta, it});
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];  // p_i = r_i + beta_i p_{i-1}
        rr = rr_new;
        if (std::sqrt(rr) < best_res) {
            best_res = std::sqrt(rr);
            best = out.f;
        }
    }

    out.iterations = it;
    x(out.f, q);
    Vector true_r(b.begin(), b.end());
    axpy(-1.0, q, true_r);
    out.residual_norm = norm2(true_r);
    out.final_residual = out.residual_norm / b_norm;
    return out;
}

CgResult cg_solve(const LinearOperator& x, std::span<const double> y, double theta,
                  const CgConfig& cfg, const CgObserver& observer) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("cg_solve: theta must be > 0");
    const double scale = theta / (1.0 + theta);
    Vector b(y.begin(), y.end());
    for (double& t : b) t *= scale;
    return cg_solve_rhs(x, b, cfg, observer);
}

}  // namespace hyperrank
