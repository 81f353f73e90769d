#include "hyperrank/blockinv.hpp"

#include "hyperrank/error.hpp"

#include <algorithm>
#include <sstream>

namespace hyperrank {

std::size_t BlockPartition::depth() const noexcept {
    std::size_t d = 0;
    for (const auto& c : children) d = std::max(d, c.depth() + 1);
    return d;
}

std::size_t BlockPartition::leaf_count() const noexcept {
    if (is_leaf()) return 1;
    return children[0].leaf_count() + children[1].leaf_count();
}

std::vector<std::pair<std::size_t, std::size_t>> BlockPartition::leaf_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    auto walk = [&out](const BlockPartition& p, std::size_t offset, auto&& self) -> void {
        if (p.is_leaf()) {
            out.emplace_back(offset, p.dim);
            return;
        }
        self(p.children[0], offset, self);
        self(p.children[1], offset + p.split_index, self);
    };
    walk(*this, 0, walk);
    return out;
}

namespace {

BlockPartition split_node(std::size_t offset, std::size_t dim, std::size_t threshold,
                          std::span<const std::size_t> boundaries) {
    BlockPartition p;
    p.dim = dim;
    p.leaf_dim_threshold = threshold;
    if (dim <= threshold) return p;

    std::size_t split = dim / 2;
    std::size_t best_gap = dim;
    for (std::size_t b : boundaries) {
        if (b <= offset || b >= offset + dim) continue;
        const std::size_t local = b - offset;
        const std::size_t gap = local > dim / 2 ? local - dim / 2 : dim / 2 - local;
        if (gap < best_gap) {
            best_gap = gap;
            split = local;
        }
    }
    p.split_index = split;
    p.children.push_back(split_node(offset, split, threshold, boundaries));
    p.children.push_back(split_node(offset + split, dim - split, threshold, boundaries));
    return p;
}

}  // namespace

BlockPartition tessellate(std::size_t dim, std::size_t threshold) {
    if (dim == 0 || threshold == 0) throw InvalidInput("tessellate: dim and threshold must be >= 1");
    return split_node(0, dim, threshold, {});
}

BlockPartition tessellate_aligned(std::size_t dim, std::size_t threshold,
                                  std::span<const std::size_t> boundaries) {
    if (dim == 0 || threshold == 0) throw InvalidInput("tessellate: dim and threshold must be >= 1");
    return split_node(0, dim, threshold, boundaries);
}

namespace {

class BlockInverter {
public:
    explicit BlockInverter(const BlockInvertOptions& opts) : opts_(opts) {}

    std::size_t leaf_inversions() const noexcept { return leaves_; }

    DenseMatrix invert(const DenseMatrix& m, const BlockPartition& part, const std::string& path) {
        if (part.is_leaf()) return invert_leaf(m, path);
        return assemble(schur(m, part, path));
    }

    SchurBlocks schur(const DenseMatrix& m, const BlockPartition& part, const std::string& path) {
        const std::size_t s = part.split_index;
        const std::size_t d = part.dim;
        const std::size_t t = d - s;
        const DenseMatrix m11 = m.block(0, 0, s, s);
        const DenseMatrix m22 = m.block(s, s, t, t);
        const DenseMatrix m12 = m.block(0, s, s, t);
        const DenseMatrix m21 = m.block(s, 0, t, s);
        const auto sparse12 = maybe_sparse(m12);
        const auto sparse21 = maybe_sparse(m21);

        const DenseMatrix inv11 = invert(m11, part.children[0], path + "/X11");
        const DenseMatrix inv22 = invert(m22, part.children[1], path + "/X22");

        // Z1 = X11 - X12 X22^-1 X21,  Z2 = X22 - X21 X11^-1 X12
        const DenseMatrix inv22_x21 = sparse21 ? matmul(inv22, *sparse21) : matmul(inv22, m21);
        DenseMatrix z1 = m11;
        z1 -= sparse12 ? matmul(*sparse12, inv22_x21) : matmul(m12, inv22_x21);

        const DenseMatrix inv11_x12 = sparse12 ? matmul(inv11, *sparse12) : matmul(inv11, m12);
        DenseMatrix z2 = m22;
        z2 -= sparse21 ? matmul(*sparse21, inv11_x12) : matmul(m21, inv11_x12);

        DenseMatrix z1_inv = invert(z1, part.children[0], path + "/Z1");
        DenseMatrix z2_inv = invert(z2, part.children[1], path + "/Z2");

        DenseMatrix top_right = matmul(inv11_x12, z2_inv);
        top_right *= -1.0;
        const DenseMatrix x21_inv11 = sparse21 ? matmul(*sparse21, inv11) : matmul(m21, inv11);
        DenseMatrix bottom_left = matmul(z2_inv, x21_inv11);
        bottom_left *= -1.0;
        return {std::move(z1_inv), std::move(top_right), std::move(bottom_left), std::move(z2_inv)};
    }

    static DenseMatrix assemble(const SchurBlocks& b) {
        const std::size_t s = b.z1_inv.rows();
        const std::size_t t = b.z2_inv.rows();
        DenseMatrix out(s + t, s + t);
        out.set_block(0, 0, b.z1_inv);
        out.set_block(0, s, b.top_right);
        out.set_block(s, 0, b.bottom_left);
        out.set_block(s, s, b.z2_inv);
        return out;
    }

private:
    std::optional<SparseMatrix> maybe_sparse(const DenseMatrix& b) const {
        std::size_t nnz = 0;
        for (double v : b.data()) nnz += v != 0.0;
        if (static_cast<double>(nnz) < opts_.sparse_density * static_cast<double>(b.size()))
            return SparseMatrix::from_dense(b);
        return std::nullopt;
    }

    DenseMatrix invert_leaf(const DenseMatrix& m, const std::string& path) {
        const std::size_t leaf_id = leaves_++;
        try {
            if (opts_.leaf_mode == LeafMode::direct) return invert_gauss_jordan(m);
            RsvdConfig cfg = opts_.leaf_rsvd;
            cfg.target_rank = m.rows();
            cfg.oversample = 0;
            cfg.seed = opts_.leaf_rsvd.seed + leaf_id;
            cfg.measure_residual = false;
            return invert_from_svd(rsvd(m, cfg), opts_.rtol);
        } catch (const SingularMatrix& e) {
            std::ostringstream os;
            os << "block_invert: singular block at " << path << ": " << e.what();
            throw SingularMatrix(os.str(), e.index(), path);
        }
    }

    const BlockInvertOptions& opts_;
    std::size_t leaves_ = 0;
};

}  // namespace

DenseMatrix BlockInverse::materialize() const {
    if (const auto* leaf = std::get_if<DenseMatrix>(&root)) return *leaf;
    return BlockInverter::assemble(std::get<SchurBlocks>(root));
}

BlockInverse block_invert(const DenseMatrix& x, const BlockPartition& part,
                          const BlockInvertOptions& opts) {
    if (x.rows() != x.cols()) throw InvalidInput("block_invert: matrix must be square");
    if (x.rows() != part.dim) {
        std::ostringstream os;
        os << "block_invert: partition dimension " << part.dim << " does not match matrix "
           << x.rows();
        throw InvalidInput(os.str());
    }
    if (!x.all_finite()) throw InvalidInput("block_invert: non-finite entry in input");

    BlockInverter inverter(opts);
    BlockInverse out{part, DenseMatrix(1, 1), std::nullopt, 0};
    if (part.is_leaf())
        out.root = inverter.invert(x, part, "root");
    else
        out.root = inverter.schur(x, part, "root");
    out.leaf_inversions = inverter.leaf_inversions();

    if (opts.measure_residual) {
        DenseMatrix check = matmul(x, out.materialize());
        check -= DenseMatrix::identity(x.rows());
        out.achieved_residual = frobenius_norm(check);
    }
    return out;
}

Vector apply_block_inverse(const BlockInverse& inv, std::span<const double> y) {
    if (y.size() != inv.dim()) throw InvalidInput("apply_block_inverse: dimension mismatch");
    if (const auto* leaf = std::get_if<DenseMatrix>(&inv.root)) return matvec(*leaf, y);

    const auto& b = std::get<SchurBlocks>(inv.root);
    const std::size_t s = b.z1_inv.rows();
    const auto y1 = y.subspan(0, s);
    const auto y2 = y.subspan(s);
    Vector top = matvec(b.z1_inv, y1);
    const Vector tr = matvec(b.top_right, y2);
    Vector bottom = matvec(b.bottom_left, y1);
    const Vector br = matvec(b.z2_inv, y2);
    Vector out;
    out.reserve(y.size());
    for (std::size_t i = 0; i < s; ++i) out.push_back(top[i] + tr[i]);
    for (std::size_t i = 0; i < bottom.size(); ++i) out.push_back(bottom[i] + br[i]);
    return out;
}

}  // namespace hyperrank
