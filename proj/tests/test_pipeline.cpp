#include <gtest/gtest.h>

#include "hyperrank/error.hpp"
#include "hyperrank/pipeline.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <cmath>
#include <queue>
#include <sstream>

using namespace hyperrank;

namespace {

// Vertices: 0 image, 1 user, 2 group, 3 geo, 4-5 tags.
HypergraphModel toy(bool with_context = true) {
    std::vector<std::vector<std::size_t>> edges{{0, 1}, {0, 4, 5}};
    if (with_context) {
        edges.push_back({1, 2});
        edges.push_back({1, 3});
    } else {
        edges.push_back({2, 3, 5});
    }
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < edges.size(); ++e)
        for (std::size_t v : edges[e]) t.push_back({v, e, 1.0});
    return HypergraphModel(SparseMatrix::from_triplets(6, edges.size(), t),
                           {{VertexType::image, 0, 1},
                            {VertexType::user, 1, 1},
                            {VertexType::group, 2, 1},
                            {VertexType::geo, 3, 1},
                            {VertexType::tag, 4, 2}});
}

Vector uniform(std::size_t n) { return Vector(n, 1.0 / double(n)); }

RankConfig solver_cfg(Solver s, std::size_t threshold = 50) {
    RankConfig c;
    c.solver = s;
    c.leaf_threshold = threshold;
    c.seed = 4;
    return c;
}

const std::array<Solver, 3> kSolvers{Solver::direct, Solver::block_rsvd, Solver::cg};

SyntheticData desk_scale(std::uint64_t seed = 1) {
    SyntheticSpec spec;
    spec.seed = seed;
    return generate_synthetic(spec);
}

}  // namespace

TEST(Query, ToyRecipe) {
    const auto hg = toy();
    const auto sys = build_adjacency(hg, uniform(4));
    const auto q = build_query(hg, sys, 0);
    EXPECT_EQ(q.owner, 1u);
    EXPECT_EQ(q.y[0], 1.0);
    EXPECT_EQ(q.y[1], 1.0);
    // delta(v) = (2, 3, 1, 1, 1, 1) / 4, delta(e) = (2, 3, 2, 2)
    const double a04 = (0.25 / 3.0) / std::sqrt(0.5 * 0.25);
    const double a12 = (0.25 / 2.0) / std::sqrt(0.75 * 0.25);
    EXPECT_NEAR(q.y[4], a04, 1e-15);
    EXPECT_NEAR(q.y[5], a04, 1e-15);
    EXPECT_NEAR(q.y[2], a12, 1e-15);
    EXPECT_NEAR(q.y[3], a12, 1e-15);
}

TEST(Query, WithheldTagsAreZeroed) {
    const auto hg = toy();
    const auto sys = build_adjacency(hg, uniform(4));
    const std::vector<std::size_t> withheld{5};
    const auto q = build_query(hg, sys, 0, withheld);
    EXPECT_EQ(q.y[5], 0.0);
    EXPECT_GT(q.y[4], 0.0);
    EXPECT_EQ(q.withheld, withheld);
    const std::vector<std::size_t> not_a_tag{2};
    EXPECT_THROW(build_query(hg, sys, 0, not_a_tag), InvalidInput);
    EXPECT_THROW(build_query(hg, sys, 1), InvalidInput);
}

TEST(Query, NoContextLeavesSegmentsZero) {
    const auto hg = toy(false);
    const auto q = build_query(hg, build_adjacency(hg, uniform(3)), 0);
    EXPECT_EQ(q.y[2], 0.0);
    EXPECT_EQ(q.y[3], 0.0);
}

TEST(Query, ImageWithoutOwnerRejected) {
    const auto h = SparseMatrix::from_triplets(3, 2, {{0, 0, 1}, {2, 0, 1}, {1, 1, 1}});
    const HypergraphModel hg(h, {{VertexType::image, 0, 1}, {VertexType::user, 1, 1}, {VertexType::tag, 2, 1}});
    EXPECT_THROW(resolve_owner(hg, 0), InvalidInput);
}

TEST(Query, FullScaleLength) {
    auto spec = SyntheticSpec::scaled(5867, 50, 3);
    EXPECT_EQ(spec.images, 1292u);
    EXPECT_EQ(spec.users, 440u);
    EXPECT_EQ(spec.groups, 1644u);
    EXPECT_EQ(spec.geo, 125u);
    EXPECT_EQ(spec.tags, 2366u);
    const auto data = generate_synthetic(spec);
    EXPECT_EQ(data.hg.vertex_count(), 5867u);
    const auto sys = build_adjacency(data.hg, uniform(data.hg.edge_count()));
    EXPECT_EQ(sys.dim(), 5867u);
    const auto q = build_query(data.hg, sys, data.truth.begin()->first, data.truth.begin()->second);
    EXPECT_EQ(q.y.size(), 5867u);
}

TEST(Rank, IdentitySystem) {
    const SystemMatrix sys{SparseMatrix(5, 5), 9.0};
    const Vector y{1, -2, 0.5, 3, 0};
    for (Solver s : kSolvers) {
        const auto r = rank(sys, y, solver_cfg(s, 2));
        for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(r.f[i], 0.9 * y[i], 1e-14) << solver_name(s);
        EXPECT_EQ(r.solver, s);
    }
}

TEST(Rank, ToySolversMatchOracle) {
    const auto hg = toy();
    const auto sys = build_adjacency(hg, uniform(4));
    const auto q = build_query(hg, sys, 0);
    Vector b = q.y;
    for (double& x : b) x *= sys.theta / (1.0 + sys.theta);
    const auto expected = oracle::solve(testsupport::to_mat(sys.dense_x()), b);
    for (Solver s : kSolvers) {
        const auto r = rank(sys, q.y, solver_cfg(s, 2));
        EXPECT_LT(oracle::max_abs_diff(r.f, expected), 1e-6) << solver_name(s);
        EXPECT_LE(r.residual, 1e-6 * norm2(q.y));
    }
}

TEST(Rank, SolversAgreeOnSyntheticInstance) {
    const auto data = generate_synthetic(SyntheticSpec::scaled(600, 20, 5));
    const auto sys = build_adjacency(data.hg, uniform(data.hg.edge_count()));
    int checked = 0;
    for (const auto& [image, tags] : data.truth) {
        if (checked++ == 3) break;
        const auto q = build_query(data.hg, sys, image, tags);
        const auto d = rank(sys, q.y, solver_cfg(Solver::direct));
        const auto b = rank(sys, q.y, solver_cfg(Solver::block_rsvd));
        const auto c = rank(sys, q.y, solver_cfg(Solver::cg));
        EXPECT_LE(oracle::max_abs_diff(d.f, b.f), 1e-5);
        EXPECT_LE(oracle::max_abs_diff(d.f, c.f), 1e-5);
        EXPECT_LE(oracle::max_abs_diff(b.f, c.f), 1e-5);
        for (const auto* r : {&d, &b, &c}) EXPECT_LE(r->residual, 1e-6 * norm2(q.y));
        EXPECT_EQ(b.threshold, 50u);
        EXPECT_GT(c.iterations, 0u);
    }
}

TEST(Scores, HandExamples) {
    const std::vector<std::size_t> truth{3, 5, 7, 9};
    const auto exact = score_at(truth, truth);
    EXPECT_DOUBLE_EQ(exact.f1, 1.0);
    const std::vector<std::size_t> disjoint{1, 2};
    EXPECT_DOUBLE_EQ(score_at(disjoint, truth).f1, 0.0);
    const std::vector<std::size_t> top5{3, 4, 6, 9, 11};
    const auto s = score_at(top5, truth);
    EXPECT_DOUBLE_EQ(s.precision, 0.4);
    EXPECT_DOUBLE_EQ(s.recall, 0.5);
    EXPECT_NEAR(s.f1, 4.0 / 9.0, 1e-15);
    EXPECT_THROW(score_at(top5, std::vector<std::size_t>{}), InvalidInput);
}

TEST(Scores, TopTagsBreakTiesByIndex) {
    const auto hg = toy();
    const Vector f{9, 9, 9, 9, 0.5, 0.5};
    EXPECT_EQ(top_tags(hg, f, 1), std::vector<std::size_t>{4});
    EXPECT_EQ(top_tags(hg, f, 10), (std::vector<std::size_t>{4, 5}));
    const Vector g{0, 0, 0, 0, 0.1, 0.7};
    EXPECT_EQ(top_tags(hg, g, 2), (std::vector<std::size_t>{5, 4}));
}

TEST(Ith, ReportsBoundedScoresAndHygiene) {
    const auto data = desk_scale();
    PipelineConfig cfg;
    const auto report = run_ith(data.hg, uniform(data.hg.edge_count()), data.truth, cfg);
    ASSERT_EQ(report.images.size(), data.truth.size());
    ASSERT_EQ(report.f1.size(), 4u);
    for (double f : report.f1) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
    for (const auto& img : report.images)
        for (const auto& s : img.scores) {
            EXPECT_GE(s.f1, 0.0);
            EXPECT_LE(s.f1, 1.0);
        }
    EXPECT_EQ(report.f1_at(5), report.f1[2]);
    EXPECT_THROW(report.f1_at(3), InvalidInput);
}

TEST(Ith, SolversGiveSameScores) {
    const auto data = desk_scale(2);
    PipelineConfig cfg;
    std::vector<EvalReport> reports;
    for (Solver s : kSolvers) {
        cfg.rank.solver = s;
        reports.push_back(run_ith(data.hg, uniform(data.hg.edge_count()), data.truth, cfg));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(reports[0].f1[i], reports[1].f1[i], 0.01);
        EXPECT_NEAR(reports[0].f1[i], reports[2].f1[i], 0.01);
    }
}

TEST(Ith, ThreadedRunMatchesSequential) {
    const auto data = desk_scale(3);
    PipelineConfig cfg;
    const auto a = run_ith(data.hg, uniform(data.hg.edge_count()), data.truth, cfg);
    cfg.threads = 3;
    const auto b = run_ith(data.hg, uniform(data.hg.edge_count()), data.truth, cfg);
    EXPECT_EQ(a.f1, b.f1);
}

TEST(Hweg, DegenerateScheduleEqualsIth) {
    const auto data = desk_scale(4);
    PipelineConfig cfg;
    cfg.inner_steps = 0;
    cfg.outer_passes = 1;
    const auto w0 = WeightState::uniform(data.hg.edge_count());
    const auto ith = run_ith(data.hg, w0.w, data.truth, cfg);
    const auto hweg = run_ith_hweg(data.hg, w0, data.truth, cfg);
    EXPECT_EQ(ith.f1, hweg.f1);
    ASSERT_EQ(ith.images.size(), hweg.images.size());
    for (std::size_t i = 0; i < ith.images.size(); ++i) EXPECT_EQ(ith.images[i].scores, hweg.images[i].scores);
}

TEST(Hweg, ScheduleAndTraces) {
    const auto data = desk_scale(5);
    GroundTruth few;
    for (const auto& [k, v] : data.truth)
        if (few.size() < 3) few.emplace(k, v);
    PipelineConfig cfg;
    cfg.rank.solver = Solver::block_rsvd;
    cfg.inner_steps = 5;
    const auto report = run_ith_hweg(data.hg, WeightState::uniform(data.hg.edge_count()), few, cfg);
    for (const auto& img : report.images) {
        ASSERT_EQ(img.passes.size(), 2u);
        EXPECT_EQ(img.passes[0].threshold, 50u);
        EXPECT_EQ(img.passes[1].threshold, 500u);
        const auto& trace = img.passes[0].trace;
        ASSERT_EQ(trace.size(), 6u);
        for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i].objective, trace[i - 1].objective);
        EXPECT_TRUE(img.passes[1].trace.empty());
        EXPECT_EQ(img.scores, img.passes[1].scores);
    }
}

TEST(Report, JsonLinesWithoutTimingIsReproducible) {
    const auto data = desk_scale(6);
    PipelineConfig cfg;
    cfg.inner_steps = 3;
    const auto w0 = WeightState::uniform(data.hg.edge_count());
    std::ostringstream a, b;
    write_report_jsonl(a, run_ith_hweg(data.hg, w0, data.truth, cfg), false);
    write_report_jsonl(b, run_ith_hweg(data.hg, w0, data.truth, cfg), false);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().find("seconds"), std::string::npos);
    EXPECT_NE(a.str().find("\"summary\":true"), std::string::npos);
}

TEST(Generator, DeskScalePostconditions) {
    SyntheticSpec spec;
    spec.clusters = 8;
    const auto data = generate_synthetic(spec);
    const auto& hg = data.hg;
    EXPECT_EQ(hg.vertex_count(), 452u);
    const auto d = degrees(hg, uniform(hg.edge_count()));
    for (double x : d.edge) EXPECT_GE(x, 1.0);
    for (double x : d.vertex) EXPECT_GT(x, 0.0);

    // Connected: breadth-first search over shared hyperedges.
    std::vector<char> seen(hg.vertex_count(), 0);
    std::queue<std::size_t> todo;
    todo.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!todo.empty()) {
        const auto v = todo.front();
        todo.pop();
        for (std::size_t e : hg.incidence().row_cols(v))
            for (std::size_t u : hg.members().row_cols(e))
                if (!seen[u]) {
                    seen[u] = 1;
                    ++reached;
                    todo.push(u);
                }
    }
    EXPECT_EQ(reached, hg.vertex_count());

    const auto tags = *hg.segment(VertexType::tag);
    const auto images = *hg.segment(VertexType::image);
    EXPECT_EQ(data.truth.size(), 24u);  // 20% of 120
    for (const auto& [image, truth] : data.truth) {
        EXPECT_EQ(hg.type_of(image), VertexType::image);
        EXPECT_EQ(truth.size(), 25u);  // 200 tags over 8 clusters
        for (std::size_t t : truth) EXPECT_EQ(hg.type_of(t), VertexType::tag);
        // Withheld: a test image shares no hyperedge with any tag.
        for (std::size_t e : hg.incidence().row_cols(image))
            for (std::size_t v : hg.members().row_cols(e)) EXPECT_FALSE(v >= tags.start);
        EXPECT_NO_THROW(resolve_owner(hg, image));
    }
    for (std::size_t i = 0; i < images.length; ++i) EXPECT_NO_THROW(resolve_owner(hg, images.start + i));
}

TEST(Generator, SingleClusterSharesTruth) {
    SyntheticSpec spec;
    spec.clusters = 1;
    const auto data = generate_synthetic(spec);
    const auto& first = data.truth.begin()->second;
    EXPECT_EQ(first.size(), spec.tags);
    for (const auto& [image, truth] : data.truth) EXPECT_EQ(truth, first);
}

TEST(Generator, RejectsInfeasibleSpecs) {
    SyntheticSpec spec;
    spec.tags = 5;
    spec.clusters = 6;
    EXPECT_THROW(generate_synthetic(spec), InvalidInput);
    spec = {};
    spec.geo = 0;
    EXPECT_THROW(generate_synthetic(spec), InvalidInput);
    spec = {};
    spec.p_in = 1.5;
    EXPECT_THROW(generate_synthetic(spec), InvalidInput);
}

TEST(Generator, SameSeedSameHypergraph) {
    const auto a = desk_scale(9);
    const auto b = desk_scale(9);
    EXPECT_EQ(a.hg.incidence(), b.hg.incidence());
    EXPECT_EQ(a.truth, b.truth);
    EXPECT_NE(desk_scale(10).hg.incidence(), a.hg.incidence());
}

TEST(Generator, ScaledCountsSumToM) {
    for (std::size_t m : {5u, 37u, 500u, 1000u, 2000u, 4000u}) {
        const auto s = SyntheticSpec::scaled(m, 3, 0);
        EXPECT_EQ(s.vertex_count(), m);
    }
    EXPECT_THROW(SyntheticSpec::scaled(4, 1, 0), InvalidInput);
}

TEST(Files, TruthRoundTripAndErrors) {
    const GroundTruth truth{{3, {10, 11}}, {7, {12}}};
    std::stringstream ss;
    write_truth(ss, truth);
    EXPECT_EQ(ss.str(), "3\t10,11\n7\t12\n");
    EXPECT_EQ(read_truth(ss), truth);
    for (const char* bad : {"3 10\n", "x\t1\n", "3\t\n", "3\t1,,2\n", "3\t1\n3\t2\n"}) {
        std::istringstream in(bad);
        EXPECT_THROW(read_truth(in), InvalidInput) << bad;
    }
}

TEST(Files, SolverNames) {
    for (Solver s : kSolvers) EXPECT_EQ(parse_solver(solver_name(s)), s);
    EXPECT_THROW(parse_solver("lu"), InvalidInput);
}

TEST(Bench, SingleScenarioSingleRow) {
    BenchConfig cfg;
    cfg.sizes = {300};
    cfg.solvers = {Solver::direct};
    cfg.images_per_size = 1;
    const auto rows = run_bench(cfg);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].m, 300u);
    EXPECT_EQ(rows[0].images, 1u);
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
              "m,solver,images,total_seconds,per_image_seconds,max_residual,f1@1,f1@2,f1@5,f1@10");
}

TEST(Bench, RepeatedRunsDifferOnlyInTime) {
    BenchConfig cfg;
    cfg.sizes = {200, 300};
    cfg.images_per_size = 2;
    const auto a = run_bench(cfg);
    const auto b = run_bench(cfg);
    ASSERT_EQ(a.size(), 6u);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].m, b[i].m);
        EXPECT_EQ(a[i].solver, b[i].solver);
        EXPECT_EQ(a[i].f1, b[i].f1);
        EXPECT_EQ(a[i].max_residual, b[i].max_residual);
    }
}
