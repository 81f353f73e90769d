#pragma once

#include "hyperrank/linalg.hpp"
#include "hyperrank/rsvd.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hyperrank {

// Recursive 2x2 tessellation along the main diagonal. A node of dimension
// `dim` is split at `split_index` into [0, split) and [split, dim); leaves
// have no children and dim <= leaf_dim_threshold.
struct BlockPartition {
    std::size_t dim = 0;
    std::size_t split_index = 0;
    std::size_t leaf_dim_threshold = 0;
    std::vector<BlockPartition> children;

    bool is_leaf() const noexcept { return children.empty(); }
    std::size_t depth() const noexcept;
    std::size_t leaf_count() const noexcept;
    // (offset, length) of every leaf, in index order.
    std::vector<std::pair<std::size_t, std::size_t>> leaf_ranges() const;
};

// Midpoint splits until every leaf has dimension <= threshold.
BlockPartition tessellate(std::size_t dim, std::size_t threshold);

// Like tessellate, but a node prefers the given global split boundaries
// (e.g. vertex-type segment starts) closest to its midpoint when one falls
// strictly inside it.
BlockPartition tessellate_aligned(std::size_t dim, std::size_t threshold,
                                  std::span<const std::size_t> boundaries);

enum class LeafMode { rsvd, direct };

struct BlockInvertOptions {
    LeafMode leaf_mode = LeafMode::rsvd;
    // Leaves use full-width factorizations: target_rank is replaced by the leaf
    // dimension and oversample is clamped to 0. seed and power_iters are used.
    RsvdConfig leaf_rsvd{};
    double rtol = 1e-12;
    // Compute ||X Xinv - I||_F after assembly (one dense product).
    bool measure_residual = true;
    // Off-diagonal blocks sparser than this go through the sparse kernels.
    double sparse_density = 0.1;
};

// Four blocks of a 2x2 node inverse:
// [ Z1^-1                   -X11^-1 X12 Z2^-1 ]
// [ -Z2^-1 X21 X11^-1        Z2^-1            ]
struct SchurBlocks {
    DenseMatrix z1_inv;
    DenseMatrix top_right;
    DenseMatrix bottom_left;
    DenseMatrix z2_inv;
};

struct BlockInverse {
    BlockPartition partition;
    // Single leaf inverse, or the root's four Schur blocks. Nested inverses
    // are consumed while assembling the root.
    std::variant<DenseMatrix, SchurBlocks> root;
    std::optional<double> achieved_residual;
    std::size_t leaf_inversions = 0;

    std::size_t dim() const noexcept { return partition.dim; }
    DenseMatrix materialize() const;
};

BlockInverse block_invert(const DenseMatrix& x, const BlockPartition& part,
                          const BlockInvertOptions& opts = {});

// Xinv * y from the stored blocks, without forming the full inverse.
Vector apply_block_inverse(const BlockInverse& inv, std::span<const double> y);

}  // namespace hyperrank
