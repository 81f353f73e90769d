#pragma once

#include "hyperrank/cg.hpp"
#include "hyperrank/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperrank {

inline constexpr double default_theta = 1.0 / 9.0;

enum class VertexType { image, user, group, geo, tag };

// Short codes used in segment files: Im, U, Gr, Geo, Ta.
std::string_view type_code(VertexType t);
VertexType parse_type_code(std::string_view code);

struct Segment {
    VertexType type;
    std::size_t start;
    std::size_t length;

    friend bool operator==(const Segment&, const Segment&) = default;
};

// Incidence matrix H (vertices x hyperedges, 0/1 entries) with vertex segments.
class HypergraphModel {
public:
    HypergraphModel(SparseMatrix incidence, std::vector<Segment> segments);

    std::size_t vertex_count() const noexcept { return h_.rows(); }
    std::size_t edge_count() const noexcept { return h_.cols(); }
    const SparseMatrix& incidence() const noexcept { return h_; }
    // H^T: row e lists the vertices of hyperedge e.
    const SparseMatrix& members() const noexcept { return ht_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }

    std::optional<Segment> segment(VertexType t) const;
    VertexType type_of(std::size_t v) const;

private:
    SparseMatrix h_;
    SparseMatrix ht_;
    std::vector<Segment> segments_;
};

struct DegreeVectors {
    Vector vertex;  // delta(v) = sum_e w(e) H(v, e)
    Vector edge;    // delta(e) = sum_v H(v, e)
};

// Throws InvalidInput naming the first empty hyperedge or isolated vertex.
DegreeVectors degrees(const HypergraphModel& hg, std::span<const double> w);

// First vertex whose weighted degree is not positive, if any.
std::optional<std::size_t> find_isolated_vertex(const HypergraphModel& hg, std::span<const double> w);

// A together with theta; X = I - A / (1 + theta).
struct SystemMatrix {
    SparseMatrix A;
    double theta = default_theta;

    std::size_t dim() const noexcept { return A.rows(); }
    void apply_x(std::span<const double> in, std::span<double> out) const;
    LinearOperator x_operator() const;
    DenseMatrix dense_x() const;
};

// A = Dv^-1/2 H W De^-1 H^T Dv^-1/2 built row by row from the sparse pattern.
SystemMatrix build_adjacency(const HypergraphModel& hg, std::span<const double> w,
                             double theta = default_theta);

// f^T (I - A) f.
double laplacian_quadratic(const SystemMatrix& sys, std::span<const double> f);

// Power-method estimate of the largest eigenvalue magnitude of a symmetric matrix.
double spectral_radius_estimate(const SparseMatrix& a, std::size_t iters = 200, std::uint64_t seed = 0);

std::vector<Segment> read_segments(std::istream& in);
std::vector<Segment> read_segments(const std::string& path);
void write_segments(std::ostream& out, const std::vector<Segment>& segments);
void write_segments(const std::string& path, const std::vector<Segment>& segments);

HypergraphModel load_hypergraph(const std::string& mtx_path, const std::string& segments_path);

}  // namespace hyperrank
