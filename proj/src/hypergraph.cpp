#include "hyperrank/hypergraph.hpp"

#include "hyperrank/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hyperrank {

namespace {

constexpr std::array<std::string_view, 5> kCodes{"Im", "U", "Gr", "Geo", "Ta"};

}  // namespace

std::string_view type_code(VertexType t) { return kCodes[static_cast<std::size_t>(t)]; }

VertexType parse_type_code(std::string_view code) {
    for (std::size_t i = 0; i < kCodes.size(); ++i)
        if (kCodes[i] == code) return static_cast<VertexType>(i);
    throw InvalidInput("unknown vertex type '" + std::string(code) + "'");
}

HypergraphModel::HypergraphModel(SparseMatrix incidence, std::vector<Segment> segments)
    : h_(std::move(incidence)), ht_(h_.transpose()), segments_(std::move(segments)) {
    for (std::size_t v = 0; v < h_.rows(); ++v)
        for (double x : h_.row_values(v))
            if (x != 1.0) throw InvalidInput("incidence entries must be 0 or 1 (vertex " + std::to_string(v) + ")");

    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });
    std::size_t next = 0;
    std::array<bool, kCodes.size()> seen{};
    for (const auto& s : segments_) {
        if (s.start != next || s.length == 0)
            throw InvalidInput("segments must tile the vertex range without gaps or overlaps");
        auto& flag = seen[static_cast<std::size_t>(s.type)];
        if (flag) throw InvalidInput("duplicate segment type " + std::string(type_code(s.type)));
        flag = true;
        next += s.length;
    }
    if (next != h_.rows())
        throw InvalidInput("segment lengths sum to " + std::to_string(next) + ", incidence has " +
                           std::to_string(h_.rows()) + " vertices");
}

std::optional<Segment> HypergraphModel::segment(VertexType t) const {
    for (const auto& s : segments_)
        if (s.type == t) return s;
    return std::nullopt;
}

VertexType HypergraphModel::type_of(std::size_t v) const {
    for (const auto& s : segments_)
        if (v >= s.start && v < s.start + s.length) return s.type;
    throw InvalidInput("vertex " + std::to_string(v) + " out of range");
}

namespace {

void check_weights(const HypergraphModel& hg, std::span<const double> w) {
    if (w.size() != hg.edge_count())
        throw InvalidInput("weight vector has length " + std::to_string(w.size()) + ", expected " +
                           std::to_string(hg.edge_count()));
    for (double x : w)
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("hyperedge weights must be finite and >= 0");
}

Vector vertex_degrees(const HypergraphModel& hg, std::span<const double> w) {
    const auto& h = hg.incidence();
    Vector dv(h.rows(), 0.0);
    for (std::size_t v = 0; v < h.rows(); ++v)
        for (std::size_t e : h.row_cols(v)) dv[v] += w[e];
    return dv;
}

}  // namespace

std::optional<std::size_t> find_isolated_vertex(const HypergraphModel& hg, std::span<const double> w) {
    check_weights(hg, w);
    const auto dv = vertex_degrees(hg, w);
    for (std::size_t v = 0; v < dv.size(); ++v)
        if (!(dv[v] > 0.0)) return v;
    return std::nullopt;
}

DegreeVectors degrees(const HypergraphModel& hg, std::span<const double> w) {
    check_weights(hg, w);
    DegreeVectors d;
    const auto& ht = hg.members();
    d.edge.resize(ht.rows());
    for (std::size_t e = 0; e < ht.rows(); ++e) {
        d.edge[e] = static_cast<double>(ht.row_cols(e).size());
        if (d.edge[e] == 0.0) throw InvalidInput("hyperedge " + std::to_string(e) + " is empty");
    }
    d.vertex = vertex_degrees(hg, w);
    for (std::size_t v = 0; v < d.vertex.size(); ++v)
        if (!(d.vertex[v] > 0.0))
            throw InvalidInput("vertex " + std::to_string(v) + " has no incident hyperedge with positive weight");
    return d;
}

void SystemMatrix::apply_x(std::span<const double> in, std::span<double> out) const {
    const double s = 1.0 / (1.0 + theta);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto cols = A.row_cols(i);
        auto vals = A.row_values(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * in[cols[k]];
        out[i] = in[i] - s * acc;
    }
}

LinearOperator SystemMatrix::x_operator() const {
    return [this](std::span<const double> in, std::span<double> out) { apply_x(in, out); };
}

DenseMatrix SystemMatrix::dense_x() const {
    const double s = 1.0 / (1.0 + theta);
    DenseMatrix x = DenseMatrix::identity(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto cols = A.row_cols(i);
        auto vals = A.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) x(i, cols[k]) -= s * vals[k];
    }
    return x;
}

SystemMatrix build_adjacency(const HypergraphModel& hg, std::span<const double> w, double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("theta must be > 0");
    const auto d = degrees(hg, w);
    const auto& h = hg.incidence();
    const auto& ht = hg.members();
    const std::size_t m = h.rows();

    Vector c(w.size());
    for (std::size_t e = 0; e < c.size(); ++e) c[e] = w[e] / d.edge[e];
    Vector s(m);
    for (std::size_t v = 0; v < m; ++v) s[v] = 1.0 / std::sqrt(d.vertex[v]);

    // Row u of H W De^-1 H^T, accumulated over u's hyperedges in increasing
    // order so that (u, v) and (v, u) sum identical terms in identical order.
    std::vector<Triplet> entries;
    Vector acc(m, 0.0);
    std::vector<char> touched(m, 0);
    std::vector<std::size_t> pattern;
    for (std::size_t u = 0; u < m; ++u) {
        pattern.clear();
        for (std::size_t e : h.row_cols(u)) {
            if (c[e] == 0.0) continue;
            for (std::size_t v : ht.row_cols(e)) {
                if (!touched[v]) {
                    touched[v] = 1;
                    pattern.push_back(v);
                }
                acc[v] += c[e];
            }
        }
        for (std::size_t v : pattern) {
            entries.push_back({u, v, (s[u] * s[v]) * acc[v]});
            acc[v] = 0.0;
            touched[v] = 0;
        }
    }
    return SystemMatrix{SparseMatrix::from_triplets(m, m, std::move(entries)), theta};
}

double laplacian_quadratic(const SystemMatrix& sys, std::span<const double> f) {
    if (f.size() != sys.dim())
        throw InvalidInput("laplacian_quadratic: vector has length " + std::to_string(f.size()) + ", expected " +
                           std::to_string(sys.dim()));
    const auto af = matvec(sys.A, f);
    return dot(f, f) - dot(f, af);
}

double spectral_radius_estimate(const SparseMatrix& a, std::size_t iters, std::uint64_t seed) {
    if (a.rows() != a.cols()) throw InvalidInput("spectral_radius_estimate: matrix must be square");
    RngStream rng(seed);
    Vector x(a.rows());
    for (auto& t : x) t = rng.normal();
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        const double n = norm2(x);
        if (n == 0.0) return 0.0;
        for (auto& t : x) t /= n;
        auto y = matvec(a, x);
        lambda = std::abs(dot(x, y));
        x = std::move(y);
    }
    return lambda;
}

std::vector<Segment> read_segments(std::istream& in) {
    std::vector<Segment> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string code;
        long long start = -1, length = -1;
        if (!(ls >> code >> start >> length) || start < 0 || length < 0)
            throw InvalidInput("segments line " + std::to_string(lineno) + ": expected 'type<TAB>start<TAB>length'");
        out.push_back({parse_type_code(code), static_cast<std::size_t>(start), static_cast<std::size_t>(length)});
    }
    if (out.empty()) throw InvalidInput("segments file has no entries");
    return out;
}

std::vector<Segment> read_segments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return read_segments(in);
}

void write_segments(std::ostream& out, const std::vector<Segment>& segments) {
    for (const auto& s : segments) out << type_code(s.type) << '\t' << s.start << '\t' << s.length << '\n';
}

void write_segments(const std::string& path, const std::vector<Segment>& segments) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    write_segments(out, segments);
}

HypergraphModel load_hypergraph(const std::string& mtx_path, const std::string& segments_path) {
    return HypergraphModel(read_matrix_market(mtx_path), read_segments(segments_path));
}

}  // namespace hyperrank
