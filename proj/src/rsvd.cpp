#include "hyperrank/rsvd.hpp"

#include "hyperrank/error.hpp"

#include <sstream>

namespace hyperrank {

namespace {

void validate(const DenseMatrix& x, const RsvdConfig& cfg, const char* op) {
    if (x.rows() != x.cols()) throw InvalidInput(std::string(op) + ": matrix must be square");
    if (cfg.target_rank == 0) throw InvalidInput(std::string(op) + ": target_rank must be >= 1");
    if (cfg.sample_width() > x.rows()) {
        std::ostringstream os;
        os << op << ": sample width " << cfg.sample_width() << " (k + oversample) exceeds dimension "
           << x.rows();
        throw InvalidInput(os.str());
    }
    if (!x.all_finite()) throw InvalidInput(std::string(op) + ": non-finite entry in input");
}

}  // namespace

DenseMatrix randomized_range(const DenseMatrix& x, const RsvdConfig& cfg) {
    validate(x, cfg, "randomized_range");
    RngStream rng(cfg.seed);
    const auto omega = gaussian_matrix(x.cols(), cfg.sample_width(), rng);

    DenseMatrix s = qr_factor(matmul(x, omega)).Q;
    if (cfg.power_iters == 0) return s;
    const DenseMatrix xt = transpose(x);
    for (std::size_t i = 0; i < cfg.power_iters; ++i) {
        const DenseMatrix s_tilde = qr_factor(matmul(xt, s)).Q;
        s = qr_factor(matmul(x, s_tilde)).Q;
    }
    return s;
}

SvdFactors rsvd(const DenseMatrix& x, const RsvdConfig& cfg) {
    const DenseMatrix s = randomized_range(x, cfg);
    const DenseMatrix b = matmul_tn(s, x);
    SvdFactors small = svd_small(b);

    SvdFactors out{matmul(s, small.U), std::move(small.sigma), std::move(small.V),
                   cfg.target_rank, cfg.sample_width(), cfg.power_iters, cfg.oversample,
                   std::nullopt};
    if (cfg.measure_residual) {
        DenseMatrix us = out.U;
        for (std::size_t i = 0; i < us.rows(); ++i)
            for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= out.sigma[j];
        out.achieved_residual = frobenius_norm(x - matmul_nt(us, out.V));
    }
    return out;
}

DenseMatrix rsvd_power_scheme(const DenseMatrix& x, const RsvdConfig& cfg) {
    validate(x, cfg, "rsvd_power_scheme");
    RngStream rng(cfg.seed);
    const auto omega = gaussian_matrix(x.cols(), cfg.sample_width(), rng);

    DenseMatrix y = matmul(x, omega);
    if (cfg.power_iters > 0) {
        const DenseMatrix xt = transpose(x);
        for (std::size_t i = 0; i < cfg.power_iters; ++i) y = matmul(x, matmul(xt, y));
    }
    if (!y.all_finite())
        throw NumericalFailure("rsvd_power_scheme: power iterate overflowed");
    return qr_factor(y).Q;
}

DenseMatrix invert_from_svd(const SvdFactors& f, double rtol) {
    if (f.sigma.empty() || f.sigma.size() != f.U.cols() || f.sigma.size() != f.V.cols())
        throw InvalidInput("invert_from_svd: inconsistent factor shapes");
    const double smax = f.sigma.front();
    for (std::size_t i = 0; i < f.sigma.size(); ++i) {
        if (!(f.sigma[i] > smax * rtol) || smax == 0.0) {
            std::ostringstream os;
            os << "invert_from_svd: singular value " << i << " (" << f.sigma[i]
               << ") below threshold " << smax * rtol;
            throw SingularMatrix(os.str(), i);
        }
    }
    DenseMatrix v_scaled = f.V;
    for (std::size_t i = 0; i < v_scaled.rows(); ++i)
        for (std::size_t j = 0; j < v_scaled.cols(); ++j) v_scaled(i, j) /= f.sigma[j];
    return matmul_nt(v_scaled, f.U);
}

double range_residual(const DenseMatrix& x, const DenseMatrix& basis) {
    const DenseMatrix proj = matmul(basis, matmul_tn(basis, x));
    return frobenius_norm(x - proj);
}

}  // namespace hyperrank
