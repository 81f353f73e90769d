#pragma once

#include "hyperrank/blockinv.hpp"
#include "hyperrank/hypergraph.hpp"
#include "hyperrank/learning.hpp"
#include "hyperrank/linalg.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperrank {

enum class Solver { direct, block_rsvd, cg };

std::string_view solver_name(Solver s);  // "direct", "block-rsvd", "cg"
Solver parse_solver(std::string_view name);

// Withheld tag vertices per test image (0-based vertex indices).
using GroundTruth = std::map<std::size_t, std::vector<std::size_t>>;

GroundTruth read_truth(std::istream& in);
GroundTruth read_truth(const std::string& path);
void write_truth(std::ostream& out, const GroundTruth& truth);
void write_truth(const std::string& path, const GroundTruth& truth);

struct QueryVector {
    Vector y;
    std::size_t image = 0;
    std::size_t owner = 0;
    std::vector<std::size_t> withheld;
};

// Lowest-index user vertex sharing a hyperedge with the image.
std::size_t resolve_owner(const HypergraphModel& hg, std::size_t image);

// y = 1 at the image and its owner, A(image, tag) over tags, A(owner, group)
// over groups and A(owner, geo) over geo vertices; withheld tags forced to 0.
QueryVector build_query(const HypergraphModel& hg, const SystemMatrix& sys, std::size_t image,
                        std::span<const std::size_t> withheld = {});

struct RankConfig {
    Solver solver = Solver::cg;
    std::size_t leaf_threshold = 50;
    LeafMode leaf_mode = LeafMode::rsvd;
    std::size_t power_iters = 2;
    // Global split boundaries for the block tessellation; midpoint splits when empty.
    std::vector<std::size_t> split_boundaries;
    double cg_tolerance = 1e-10;
    std::uint64_t seed = 0;
};

struct RankingResult {
    Vector f;
    Solver solver = Solver::cg;
    double seconds = 0.0;
    // ||X f - theta/(1+theta) y||
    double residual = 0.0;
    std::size_t threshold = 0;   // block-rsvd only
    std::size_t iterations = 0;  // cg only
};

// f = theta/(1+theta) X^-1 y with the chosen back-end.
RankingResult rank(const SystemMatrix& sys, std::span<const double> y, const RankConfig& cfg);

inline constexpr std::array<std::size_t, 4> default_eval_positions{1, 2, 5, 10};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const PrecisionRecall&, const PrecisionRecall&) = default;
};

PrecisionRecall score_at(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

// Tag vertices ordered by decreasing f, ties by ascending index.
std::vector<std::size_t> top_tags(const HypergraphModel& hg, std::span<const double> f, std::size_t k);

struct PassRecord {
    std::size_t pass = 0;
    std::size_t threshold = 0;
    std::vector<PrecisionRecall> scores;  // one per evaluation position
    double residual = 0.0;
    std::vector<TraceEntry> trace;        // weight learning after this pass's ranking
};

struct ImageEval {
    std::size_t image = 0;
    std::vector<PrecisionRecall> scores;  // final pass
    std::vector<PassRecord> passes;
    double seconds = 0.0;
    double solve_seconds = 0.0;
    std::size_t cg_iterations = 0;
};

struct EvalReport {
    std::string method;  // "ith" or "ith-hweg"
    Solver solver = Solver::cg;
    std::vector<std::size_t> positions;
    std::vector<double> f1;  // macro average per position
    std::vector<ImageEval> images;
    double total_seconds = 0.0;

    double f1_at(std::size_t k) const;
};

struct PipelineConfig {
    double theta = default_theta;
    RankConfig rank;
    std::vector<std::size_t> positions{default_eval_positions.begin(), default_eval_positions.end()};
    // Block thresholds for pass 1 and for every later pass.
    std::size_t first_threshold = 50;
    std::size_t later_threshold = 500;
    std::size_t inner_steps = 10;
    std::size_t outer_passes = 2;
    // Images processed concurrently; 1 keeps everything on the calling thread.
    std::size_t threads = 1;
};

// Fixed weights: A is built once, one ranking per test image.
EvalReport run_ith(const HypergraphModel& hg, std::span<const double> w, const GroundTruth& truth,
                   const PipelineConfig& cfg);

// Per image, alternates ranking and weight learning for cfg.outer_passes
// passes starting from w0. Clamped weights are released at every pass.
EvalReport run_ith_hweg(const HypergraphModel& hg, const WeightState& w0, const GroundTruth& truth,
                        const PipelineConfig& cfg);

// One JSON object per image followed by a summary object.
void write_report_jsonl(std::ostream& out, const EvalReport& report, bool include_timing = true);

// --- synthetic data ------------------------------------------------------------

struct SyntheticSpec {
    std::size_t images = 120;
    std::size_t users = 40;
    std::size_t groups = 80;
    std::size_t geo = 12;
    std::size_t tags = 200;
    std::size_t clusters = 8;
    double p_in = 0.8;
    double p_out = 0.05;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;

    std::size_t vertex_count() const noexcept { return images + users + groups + geo + tags; }
    // Five counts in the proportions of the full-scale dataset, summing to m.
    static SyntheticSpec scaled(std::size_t m, std::size_t clusters, std::uint64_t seed);
};

struct SyntheticData {
    HypergraphModel hg;
    GroundTruth truth;
};

// Planted clusters: images, users, groups, geo and tags are dealt round-robin
// into clusters. Every hyperedge is anchored at one entity; candidates from the
// anchor's cluster join with probability p_in, and for every other cluster one
// random candidate joins with probability p_out. Hyperedges: owner {image,
// user}, image tags (training images only), user groups, user geo, and geo
// {geo, images}. Test images keep no tag hyperedge; their ground truth is the
// tag pool of their cluster.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

void write_spec(std::ostream& out, const SyntheticSpec& spec);
// Writes <prefix>.mtx, <prefix>.segments.tsv, <prefix>.truth.tsv and <prefix>.gen.conf.
void write_synthetic(const std::string& prefix, const SyntheticData& data, const SyntheticSpec& spec);

// --- benchmark -------------------------------------------------------------------

struct BenchConfig {
    std::vector<std::size_t> sizes{500, 1000, 2000, 4000};
    std::vector<Solver> solvers{Solver::direct, Solver::block_rsvd, Solver::cg};
    std::size_t images_per_size = 2;
    // Cluster count is m / vertices_per_cluster (at least 1).
    std::size_t vertices_per_cluster = 100;
    double theta = default_theta;
    std::size_t threshold = 50;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t m = 0;
    Solver solver = Solver::cg;
    std::size_t images = 0;
    double total_seconds = 0.0;
    double per_image_seconds = 0.0;
    double max_residual = 0.0;
    std::vector<double> f1;  // macro F1 at default_eval_positions
};

using BenchProgress = std::function<void(const BenchRow&)>;

std::vector<BenchRow> run_bench(const BenchConfig& cfg, const BenchProgress& progress = {});

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
void write_bench_jsonl(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace hyperrank
