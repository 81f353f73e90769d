#pragma once

#include "hyperrank/linalg.hpp"

#include <cstddef>
#include <cstdint>

namespace hyperrank {

// Randomized SVD parameters. The sample width is target_rank + oversample and
// must not exceed the matrix dimension.
struct RsvdConfig {
    std::size_t target_rank = 1;
    std::size_t oversample = 10;
    std::size_t power_iters = 2;
    std::uint64_t seed = 0;
    // Store ||X - U S V^T||_F in SvdFactors::achieved_residual (one extra product).
    bool measure_residual = true;

    std::size_t sample_width() const noexcept { return target_rank + oversample; }
};

// Orthonormal basis S (m x l) for the range of X by subspace iteration:
// S0 = qr(X Omega), then power_iters passes of S~ = qr(X^T S), S = qr(X S~).
DenseMatrix randomized_range(const DenseMatrix& x, const RsvdConfig& cfg);

// Randomized SVD: B = S^T X, B = U~ Sigma V^T, U = S U~.
SvdFactors rsvd(const DenseMatrix& x, const RsvdConfig& cfg);

// Basis of Y = (X X^T)^q X Omega with a single terminal QR. Loses the small
// end of the spectrum to round-off much sooner than randomized_range; kept as
// the low-accuracy reference path.
DenseMatrix rsvd_power_scheme(const DenseMatrix& x, const RsvdConfig& cfg);

// V Sigma^-1 U^T. Every retained singular value must exceed sigma_max * rtol,
// otherwise SingularMatrix is thrown with the offending index.
DenseMatrix invert_from_svd(const SvdFactors& f, double rtol = 1e-12);

// ||X - S S^T X||_F
double range_residual(const DenseMatrix& x, const DenseMatrix& basis);

}  // namespace hyperrank
