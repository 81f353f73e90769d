#include "hyperrank/pipeline.hpp"

#include "hyperrank/cg.hpp"
#include "hyperrank/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace hyperrank {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

Segment require_segment(const HypergraphModel& hg, VertexType t) {
    auto s = hg.segment(t);
    if (!s) throw InvalidInput("hypergraph has no " + std::string(type_code(t)) + " segment");
    return *s;
}

bool inside(const Segment& s, std::size_t v) { return v >= s.start && v < s.start + s.length; }

}  // namespace

std::string_view solver_name(Solver s) {
    switch (s) {
        case Solver::direct: return "direct";
        case Solver::block_rsvd: return "block-rsvd";
        case Solver::cg: return "cg";
    }
    return "?";
}

Solver parse_solver(std::string_view name) {
    if (name == "direct") return Solver::direct;
    if (name == "block-rsvd") return Solver::block_rsvd;
    if (name == "cg") return Solver::cg;
    throw InvalidInput("unknown solver '" + std::string(name) + "' (expected direct, block-rsvd or cg)");
}

// --- ground truth -------------------------------------------------------------------

GroundTruth read_truth(std::istream& in) {
    GroundTruth truth;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw InvalidInput("truth line " + std::to_string(lineno) + ": missing tab");
        try {
            std::size_t used = 0;
            const auto image = std::stoull(line.substr(0, tab), &used);
            if (used != tab) throw std::invalid_argument("image");
            std::vector<std::size_t> tags;
            std::istringstream list(line.substr(tab + 1));
            std::string item;
            while (std::getline(list, item, ',')) {
                if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
                    throw std::invalid_argument("tag");
                tags.push_back(std::stoull(item));
            }
            if (tags.empty()) throw std::invalid_argument("tags");
            std::sort(tags.begin(), tags.end());
            tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
            if (!truth.emplace(image, std::move(tags)).second)
                throw InvalidInput("truth line " + std::to_string(lineno) + ": duplicate image");
        } catch (const std::logic_error&) {
            throw InvalidInput("truth line " + std::to_string(lineno) + ": expected 'image<TAB>tag,tag,...'");
        }
    }
    return truth;
}

GroundTruth read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return read_truth(in);
}

void write_truth(std::ostream& out, const GroundTruth& truth) {
    for (const auto& [image, tags] : truth) {
        out << image << '\t';
        for (std::size_t i = 0; i < tags.size(); ++i) out << (i ? "," : "") << tags[i];
        out << '\n';
    }
}

void write_truth(const std::string& path, const GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    write_truth(out, truth);
}

// --- query -------------------------------------------------------------------------

std::size_t resolve_owner(const HypergraphModel& hg, std::size_t image) {
    const auto users = require_segment(hg, VertexType::user);
    std::optional<std::size_t> owner;
    for (std::size_t e : hg.incidence().row_cols(image))
        for (std::size_t v : hg.members().row_cols(e))
            if (inside(users, v) && (!owner || v < *owner)) owner = v;
    if (!owner) throw InvalidInput("image " + std::to_string(image) + " shares no hyperedge with a user");
    return *owner;
}

QueryVector build_query(const HypergraphModel& hg, const SystemMatrix& sys, std::size_t image,
                        std::span<const std::size_t> withheld) {
    if (sys.dim() != hg.vertex_count()) throw InvalidInput("system matrix does not match the hypergraph");
    const auto images = require_segment(hg, VertexType::image);
    if (!inside(images, image)) throw InvalidInput("vertex " + std::to_string(image) + " is not an image");
    const auto tags = require_segment(hg, VertexType::tag);

    QueryVector q;
    q.image = image;
    q.owner = resolve_owner(hg, image);
    q.y.assign(hg.vertex_count(), 0.0);
    q.y[image] = 1.0;
    q.y[q.owner] = 1.0;

    auto copy_row = [&](std::size_t from, const std::optional<Segment>& seg) {
        if (!seg) return;
        auto cols = sys.A.row_cols(from);
        auto vals = sys.A.row_values(from);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (inside(*seg, cols[k])) q.y[cols[k]] = vals[k];
    };
    copy_row(image, tags);
    copy_row(q.owner, hg.segment(VertexType::group));
    copy_row(q.owner, hg.segment(VertexType::geo));

    for (std::size_t t : withheld) {
        if (!inside(tags, t)) throw InvalidInput("withheld vertex " + std::to_string(t) + " is not a tag");
        q.y[t] = 0.0;
        q.withheld.push_back(t);
    }
    return q;
}

// --- ranking -----------------------------------------------------------------------

RankingResult rank(const SystemMatrix& sys, std::span<const double> y, const RankConfig& cfg) {
    const std::size_t m = sys.dim();
    if (y.size() != m) throw InvalidInput("query vector length does not match the system");
    const double scale = sys.theta / (1.0 + sys.theta);
    Vector b(y.begin(), y.end());
    for (double& t : b) t *= scale;

    RankingResult out;
    out.solver = cfg.solver;
    const auto t0 = Clock::now();
    switch (cfg.solver) {
        case Solver::direct: {
            const auto inv = invert_gauss_jordan(sys.dense_x());
            out.f = matvec(inv, b);
            break;
        }
        case Solver::block_rsvd: {
            if (cfg.leaf_threshold == 0) throw InvalidInput("block threshold must be >= 1");
            const auto part = cfg.split_boundaries.empty()
                                  ? tessellate(m, cfg.leaf_threshold)
                                  : tessellate_aligned(m, cfg.leaf_threshold, cfg.split_boundaries);
            BlockInvertOptions opts;
            opts.leaf_mode = cfg.leaf_mode;
            opts.leaf_rsvd.power_iters = cfg.power_iters;
            opts.leaf_rsvd.seed = cfg.seed;
            opts.leaf_rsvd.measure_residual = false;
            opts.measure_residual = false;
            const auto inv = block_invert(sys.dense_x(), part, opts);
            out.f = apply_block_inverse(inv, b);
            out.threshold = cfg.leaf_threshold;
            break;
        }
        case Solver::cg: {
            CgConfig cg;
            cg.rel_tolerance = cfg.cg_tolerance;
            const auto res = cg_solve_rhs(sys.x_operator(), b, cg);
            out.f = res.f;
            out.iterations = res.iterations;
            break;
        }
    }
    out.seconds = seconds_since(t0);

    for (double t : out.f)
        if (!std::isfinite(t)) throw NumericalFailure("ranking produced non-finite scores");
    Vector r(m);
    sys.apply_x(out.f, r);
    axpy(-1.0, b, r);
    out.residual = norm2(r);
    return out;
}

// --- evaluation ----------------------------------------------------------------------

PrecisionRecall score_at(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
    if (truth.empty()) throw InvalidInput("ground truth is empty");
    std::size_t hits = 0;
    for (std::size_t p : predicted)
        if (std::find(truth.begin(), truth.end(), p) != truth.end()) ++hits;
    PrecisionRecall s;
    s.precision = predicted.empty() ? 0.0 : double(hits) / double(predicted.size());
    s.recall = double(hits) / double(truth.size());
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

std::vector<std::size_t> top_tags(const HypergraphModel& hg, std::span<const double> f, std::size_t k) {
    const auto tags = require_segment(hg, VertexType::tag);
    if (f.size() != hg.vertex_count()) throw InvalidInput("ranking vector length does not match the vertex count");
    std::vector<std::size_t> idx(tags.length);
    std::iota(idx.begin(), idx.end(), tags.start);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return f[a] > f[b] || (f[a] == f[b] && a < b); });
    idx.resize(k);
    return idx;
}

double EvalReport::f1_at(std::size_t k) const {
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (positions[i] == k) return f1[i];
    throw InvalidInput("position " + std::to_string(k) + " was not evaluated");
}

namespace {

void check_config(const PipelineConfig& cfg) {
    if (cfg.positions.empty()) throw InvalidInput("at least one evaluation position is required");
    for (std::size_t k : cfg.positions)
        if (k == 0) throw InvalidInput("evaluation positions must be >= 1");
    if (cfg.outer_passes == 0) throw InvalidInput("outer_passes must be >= 1");
    if (cfg.first_threshold == 0 || cfg.later_threshold == 0) throw InvalidInput("block thresholds must be >= 1");
}

std::vector<PrecisionRecall> score_all(const HypergraphModel& hg, std::span<const double> f,
                                       std::span<const std::size_t> truth, std::span<const std::size_t> positions) {
    const std::size_t kmax = *std::max_element(positions.begin(), positions.end());
    const auto ranked = top_tags(hg, f, kmax);
    std::vector<PrecisionRecall> out;
    for (std::size_t k : positions)
        out.push_back(score_at(std::span(ranked).first(std::min(k, ranked.size())), truth));
    return out;
}

void summarize(EvalReport& report) {
    report.f1.assign(report.positions.size(), 0.0);
    for (const auto& img : report.images)
        for (std::size_t i = 0; i < report.positions.size(); ++i) report.f1[i] += img.scores[i].f1;
    if (!report.images.empty())
        for (double& x : report.f1) x /= double(report.images.size());
}

}  // namespace

EvalReport run_ith(const HypergraphModel& hg, std::span<const double> w, const GroundTruth& truth,
                   const PipelineConfig& cfg) {
    check_config(cfg);
    const auto t0 = Clock::now();
    const auto sys = build_adjacency(hg, w, cfg.theta);

    std::vector<std::pair<std::size_t, const std::vector<std::size_t>*>> work;
    for (const auto& [image, tags] : truth) work.emplace_back(image, &tags);

    EvalReport report;
    report.method = "ith";
    report.solver = cfg.rank.solver;
    report.positions = cfg.positions;
    report.images.resize(work.size());
    auto rc = cfg.rank;
    rc.leaf_threshold = cfg.first_threshold;

    parallel_for(work.size(), cfg.threads, [&](std::size_t i) {
        const auto ti = Clock::now();
        const auto& [image, tags] = work[i];
        const auto q = build_query(hg, sys, image, *tags);
        const auto r = rank(sys, q.y, rc);
        auto& out = report.images[i];
        out.image = image;
        out.scores = score_all(hg, r.f, *tags, cfg.positions);
        out.passes.push_back({1, r.threshold, out.scores, r.residual, {}});
        out.solve_seconds = r.seconds;
        out.cg_iterations = r.iterations;
        out.seconds = seconds_since(ti);
    });
    summarize(report);
    report.total_seconds = seconds_since(t0);
    return report;
}

EvalReport run_ith_hweg(const HypergraphModel& hg, const WeightState& w0, const GroundTruth& truth,
                        const PipelineConfig& cfg) {
    check_config(cfg);
    w0.validate();
    const auto t0 = Clock::now();
    const auto first_sys = build_adjacency(hg, w0.w, cfg.theta);

    std::vector<std::pair<std::size_t, const std::vector<std::size_t>*>> work;
    for (const auto& [image, tags] : truth) work.emplace_back(image, &tags);

    EvalReport report;
    report.method = "ith-hweg";
    report.solver = cfg.rank.solver;
    report.positions = cfg.positions;
    report.images.resize(work.size());

    parallel_for(work.size(), cfg.threads, [&](std::size_t i) {
        const auto ti = Clock::now();
        const auto& [image, tags] = work[i];
        auto& out = report.images[i];
        out.image = image;
        WeightState state = w0;
        for (std::size_t pass = 1; pass <= cfg.outer_passes; ++pass) {
            std::optional<SystemMatrix> rebuilt;
            if (pass > 1) rebuilt = build_adjacency(hg, state.w, cfg.theta);
            const SystemMatrix& sys = rebuilt ? *rebuilt : first_sys;

            auto rc = cfg.rank;
            rc.leaf_threshold = pass == 1 ? cfg.first_threshold : cfg.later_threshold;
            const auto q = build_query(hg, sys, image, *tags);
            const auto r = rank(sys, q.y, rc);
            PassRecord rec{pass, r.threshold, score_all(hg, r.f, *tags, cfg.positions), r.residual, {}};
            out.solve_seconds += r.seconds;
            out.cg_iterations += r.iterations;

            if (pass < cfg.outer_passes && cfg.inner_steps > 0) {
                state.active_set.clear();
                state.mu = w0.mu;
                auto learned = learn_weights(hg, r.f, state, cfg.inner_steps);
                state = std::move(learned.state);
                rec.trace = std::move(learned.trace);
            }
            out.passes.push_back(std::move(rec));
        }
        out.scores = out.passes.back().scores;
        out.seconds = seconds_since(ti);
    });
    summarize(report);
    report.total_seconds = seconds_since(t0);
    return report;
}

void write_report_jsonl(std::ostream& out, const EvalReport& report, bool include_timing) {
    using nlohmann::json;
    auto scores_json = [&](const std::vector<PrecisionRecall>& s) {
        json j = json::object();
        for (std::size_t i = 0; i < report.positions.size(); ++i)
            j[std::to_string(report.positions[i])] = {{"precision", s[i].precision}, {"recall", s[i].recall},
                                                      {"f1", s[i].f1}};
        return j;
    };
    for (const auto& img : report.images) {
        json j{{"image", img.image}, {"scores", scores_json(img.scores)}};
        json passes = json::array();
        for (const auto& p : img.passes) {
            json trace = json::array();
            for (const auto& t : p.trace)
                trace.push_back({{"step", t.step}, {"objective", t.objective}, {"n_active", t.n_active}, {"mu", t.mu}});
            passes.push_back({{"pass", p.pass},
                              {"threshold", p.threshold},
                              {"residual", p.residual},
                              {"scores", scores_json(p.scores)},
                              {"trace", trace}});
        }
        j["passes"] = passes;
        if (report.solver == Solver::cg) j["cg_iterations"] = img.cg_iterations;
        if (include_timing) {
            j["seconds"] = img.seconds;
            j["solve_seconds"] = img.solve_seconds;
        }
        out << j.dump() << '\n';
    }
    json summary{{"summary", true},
                 {"method", report.method},
                 {"solver", solver_name(report.solver)},
                 {"images", report.images.size()}};
    json f1 = json::object();
    for (std::size_t i = 0; i < report.positions.size(); ++i) f1[std::to_string(report.positions[i])] = report.f1[i];
    summary["f1"] = f1;
    if (include_timing) summary["total_seconds"] = report.total_seconds;
    out << summary.dump() << '\n';
}

// --- synthetic data --------------------------------------------------------------------

SyntheticSpec SyntheticSpec::scaled(std::size_t m, std::size_t clusters, std::uint64_t seed) {
    constexpr std::array<double, 5> full{1292, 440, 1644, 125, 2366};
    const double total = std::accumulate(full.begin(), full.end(), 0.0);
    if (m < full.size()) throw InvalidInput("need at least 5 vertices, one per type");
    std::array<std::size_t, 5> counts{};
    std::array<double, 5> frac{};
    std::size_t used = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double exact = double(m) * full[i] / total;
        counts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact)));
        frac[i] = exact - std::floor(exact);
        used += counts[i];
    }
    // Hand out the remainder by largest fractional part (ties to the earlier type).
    while (used < m) {
        const auto i = static_cast<std::size_t>(std::max_element(frac.begin(), frac.end()) - frac.begin());
        ++counts[i];
        frac[i] = -1.0;
        ++used;
    }
    while (used > m) {
        const auto i = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        --counts[i];
        --used;
    }
    SyntheticSpec s;
    s.images = counts[0];
    s.users = counts[1];
    s.groups = counts[2];
    s.geo = counts[3];
    s.tags = counts[4];
    s.clusters = std::max<std::size_t>(1, clusters);
    s.seed = seed;
    return s;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    const std::array<std::size_t, 5> counts{spec.images, spec.users, spec.groups, spec.geo, spec.tags};
    for (std::size_t c : counts)
        if (c == 0) throw InvalidInput("every vertex type needs at least one vertex");
    if (spec.clusters == 0) throw InvalidInput("clusters must be >= 1");
    if (spec.tags < spec.clusters) throw InvalidInput("fewer tags than clusters: some cluster would have no tags");
    for (double p : {spec.p_in, spec.p_out})
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("probabilities must lie in [0, 1]");
    if (!(spec.test_fraction > 0.0 && spec.test_fraction <= 1.0)) throw InvalidInput("test_fraction must lie in (0, 1]");

    const std::size_t C = spec.clusters;
    std::array<std::size_t, 5> start{};
    for (std::size_t t = 1; t < 5; ++t) start[t] = start[t - 1] + counts[t - 1];
    const std::size_t m = start[4] + counts[4];

    // pool[type][cluster] = vertex ids, dealt round-robin.
    std::array<std::vector<std::vector<std::size_t>>, 5> pool;
    for (std::size_t t = 0; t < 5; ++t) {
        pool[t].resize(C);
        for (std::size_t i = 0; i < counts[t]; ++i) pool[t][i % C].push_back(start[t] + i);
    }
    auto cluster_of = [&](std::size_t type, std::size_t v) { return (v - start[type]) % C; };

    RngStream rng(spec.seed);
    auto pick = [&](const std::vector<std::size_t>& from) { return from[rng.uniform_index(from.size())]; };
    auto pick_any = [&](std::size_t type) { return start[type] + rng.uniform_index(counts[type]); };

    // Candidates of `type` joining an edge anchored in cluster c.
    auto join = [&](std::size_t c, std::size_t type, std::vector<std::size_t>& edge) {
        for (std::size_t v : pool[type][c])
            if (rng.uniform() < spec.p_in) edge.push_back(v);
        for (std::size_t o = 0; o < C; ++o) {
            if (o == c || pool[type][o].empty()) continue;
            if (rng.uniform() < spec.p_out) edge.push_back(pick(pool[type][o]));
        }
    };

    enum { kImage, kUser, kGroup, kGeo, kTag };

    // Test images: a seeded partial shuffle.
    std::vector<std::size_t> order(spec.images);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(spec.test_fraction * double(spec.images))), 1, spec.images);
    for (std::size_t i = 0; i < n_test; ++i) std::swap(order[i], order[i + rng.uniform_index(spec.images - i)]);
    std::vector<char> is_test(spec.images, 0);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

    std::vector<std::vector<std::size_t>> edges;
    // Owner edges.
    for (std::size_t i = 0; i < spec.images; ++i) {
        const std::size_t img = start[kImage] + i;
        const auto& users = pool[kUser][cluster_of(kImage, img)];
        edges.push_back({img, users.empty() ? pick_any(kUser) : pick(users)});
    }
    // Image tags, training images only.
    std::vector<std::vector<std::size_t>> tag_edge_of_cluster(C);
    for (std::size_t i = 0; i < spec.images; ++i) {
        if (is_test[i]) continue;
        const std::size_t img = start[kImage] + i;
        const std::size_t c = cluster_of(kImage, img);
        std::vector<std::size_t> e{img};
        join(c, kTag, e);
        if (e.size() == 1) e.push_back(pick(pool[kTag][c]));
        tag_edge_of_cluster[c].push_back(edges.size());
        edges.push_back(std::move(e));
    }
    // User groups and user geo.
    std::vector<std::size_t> group_edge_of_user(spec.users);
    for (std::size_t kind : {kGroup, kGeo})
        for (std::size_t i = 0; i < spec.users; ++i) {
            const std::size_t u = start[kUser] + i;
            std::vector<std::size_t> e{u};
            join(cluster_of(kUser, u), kind, e);
            if (kind == kGroup) group_edge_of_user[i] = edges.size();
            edges.push_back(std::move(e));
        }
    // Geo locations and the images taken there.
    for (std::size_t i = 0; i < spec.geo; ++i) {
        const std::size_t g = start[kGeo] + i;
        std::vector<std::size_t> e{g};
        join(cluster_of(kGeo, g), kImage, e);
        edges.push_back(std::move(e));
    }

    // Cover groups and tags that no hyperedge picked up.
    std::vector<char> covered(m, 0);
    for (const auto& e : edges)
        for (std::size_t v : e) covered[v] = 1;
    for (std::size_t i = 0; i < spec.groups; ++i) {
        const std::size_t g = start[kGroup] + i;
        if (covered[g]) continue;
        const auto& users = pool[kUser][cluster_of(kGroup, g)];
        const std::size_t u = users.empty() ? pick_any(kUser) : pick(users);
        edges[group_edge_of_user[u - start[kUser]]].push_back(g);
    }
    for (std::size_t i = 0; i < spec.tags; ++i) {
        const std::size_t t = start[kTag] + i;
        if (covered[t]) continue;
        const auto& own = tag_edge_of_cluster[cluster_of(kTag, t)];
        if (!own.empty()) {
            edges[pick(own)].push_back(t);
            continue;
        }
        std::vector<std::size_t> any;
        for (const auto& list : tag_edge_of_cluster) any.insert(any.end(), list.begin(), list.end());
        if (!any.empty())
            edges[pick(any)].push_back(t);
        else
            edges.push_back({t});
    }

    std::vector<Triplet> entries;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto& list = edges[e];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        for (std::size_t v : list) entries.push_back({v, e, 1.0});
    }
    std::vector<Segment> segments{{VertexType::image, start[kImage], spec.images},
                                  {VertexType::user, start[kUser], spec.users},
                                  {VertexType::group, start[kGroup], spec.groups},
                                  {VertexType::geo, start[kGeo], spec.geo},
                                  {VertexType::tag, start[kTag], spec.tags}};

    GroundTruth truth;
    for (std::size_t i = 0; i < spec.images; ++i)
        if (is_test[i]) truth[start[kImage] + i] = pool[kTag][cluster_of(kImage, start[kImage] + i)];

    return SyntheticData{HypergraphModel(SparseMatrix::from_triplets(m, edges.size(), std::move(entries)), segments),
                         std::move(truth)};
}

void write_spec(std::ostream& out, const SyntheticSpec& spec) {
    out << "images = " << spec.images << '\n'
        << "users = " << spec.users << '\n'
        << "groups = " << spec.groups << '\n'
        << "geo = " << spec.geo << '\n'
        << "tags = " << spec.tags << '\n'
        << "clusters = " << spec.clusters << '\n'
        << "p-in = " << spec.p_in << '\n'
        << "p-out = " << spec.p_out << '\n'
        << "test-fraction = " << spec.test_fraction << '\n'
        << "seed = " << spec.seed << '\n'
        << "# owner: the user sharing the image's two-vertex owner hyperedge\n"
        << "# truth: every tag of the image's cluster; test images carry no tag hyperedge\n";
}

void write_synthetic(const std::string& prefix, const SyntheticData& data, const SyntheticSpec& spec) {
    write_matrix_market(prefix + ".mtx", data.hg.incidence());
    write_segments(prefix + ".segments.tsv", data.hg.segments());
    write_truth(prefix + ".truth.tsv", data.truth);
    std::ofstream conf(prefix + ".gen.conf");
    if (!conf) throw InvalidInput("cannot write " + prefix + ".gen.conf");
    write_spec(conf, spec);
}

// --- benchmark -------------------------------------------------------------------------

std::vector<BenchRow> run_bench(const BenchConfig& cfg, const BenchProgress& progress) {
    if (cfg.sizes.empty() || cfg.solvers.empty()) throw InvalidInput("bench needs at least one size and one solver");
    if (cfg.images_per_size == 0 || cfg.vertices_per_cluster == 0)
        throw InvalidInput("images_per_size and vertices_per_cluster must be >= 1");

    std::vector<BenchRow> rows;
    for (std::size_t m : cfg.sizes) {
        auto spec = SyntheticSpec::scaled(m, m / cfg.vertices_per_cluster, cfg.seed);
        const auto data = generate_synthetic(spec);
        const auto sys = build_adjacency(data.hg, WeightState::uniform(data.hg.edge_count()).w, cfg.theta);

        std::vector<QueryVector> queries;
        for (const auto& [image, tags] : data.truth) {
            if (queries.size() == cfg.images_per_size) break;
            queries.push_back(build_query(data.hg, sys, image, tags));
        }

        for (Solver s : cfg.solvers) {
            RankConfig rc;
            rc.solver = s;
            rc.leaf_threshold = cfg.threshold;
            rc.seed = cfg.seed;
            BenchRow row;
            row.m = m;
            row.solver = s;
            row.images = queries.size();
            row.f1.assign(default_eval_positions.size(), 0.0);
            for (const auto& q : queries) {
                const auto r = rank(sys, q.y, rc);
                row.total_seconds += r.seconds;
                row.max_residual = std::max(row.max_residual, r.residual);
                const auto scores = score_all(data.hg, r.f, data.truth.at(q.image), default_eval_positions);
                for (std::size_t i = 0; i < scores.size(); ++i) row.f1[i] += scores[i].f1 / double(queries.size());
            }
            row.per_image_seconds = row.total_seconds / double(queries.size());
            if (progress) progress(row);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "m,solver,images,total_seconds,per_image_seconds,max_residual";
    for (std::size_t k : default_eval_positions) out << ",f1@" << k;
    out << '\n';
    for (const auto& r : rows) {
        out << r.m << ',' << solver_name(r.solver) << ',' << r.images << ',' << r.total_seconds << ','
            << r.per_image_seconds << ',' << r.max_residual;
        for (double f : r.f1) out << ',' << f;
        out << '\n';
    }
}

void write_bench_jsonl(std::ostream& out, const std::vector<BenchRow>& rows) {
    for (const auto& r : rows) {
        nlohmann::json f1 = nlohmann::json::object();
        for (std::size_t i = 0; i < r.f1.size(); ++i) f1[std::to_string(default_eval_positions[i])] = r.f1[i];
        nlohmann::json j{{"m", r.m},
                         {"solver", solver_name(r.solver)},
                         {"images", r.images},
                         {"total_seconds", r.total_seconds},
                         {"per_image_seconds", r.per_image_seconds},
                         {"max_residual", r.max_residual},
                         {"f1", f1}};
        out << j.dump() << '\n';
    }
}

}  // namespace hyperrank
