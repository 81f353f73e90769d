#include <gtest/gtest.h>

#include "hyperrank/cg.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace hyperrank;
using testsupport::from_mat;

namespace {

Vector random_vector(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    Vector v(n);
    for (auto& t : v) t = rng.normal();
    return v;
}

double x_norm_sq(const oracle::Mat& x, const Vector& e) {
    const auto xe = oracle::mul(x, e);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * xe[i];
    return s;
}

}  // namespace

TEST(Cg, IdentitySystemConvergesInOneStep) {
    const auto x = DenseMatrix::identity(7);
    const Vector y{1, -2, 3, 0.5, 0, 4, -1};
    const auto res = cg_solve(dense_operator(x), y, 9.0);
    EXPECT_EQ(res.iterations, 1u);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(res.f[i], 0.9 * y[i], 1e-15);
}

TEST(Cg, TwoByTwoHandSolve) {
    const auto x = DenseMatrix::from_rows({{4, 1}, {1, 3}});
    const auto res = cg_solve_rhs(dense_operator(x), Vector{1, 2});
    EXPECT_NEAR(res.f[0], 1.0 / 11.0, 1e-14);
    EXPECT_NEAR(res.f[1], 7.0 / 11.0, 1e-14);
    EXPECT_LE(res.iterations, 2u);
    EXPECT_LE(res.final_residual, 1e-8);
}

TEST(Cg, RandomSpdMatchesEliminationOracle) {
    const std::size_t n = 300;
    const auto m = oracle::random_spd(n, 12, 0.5);
    const auto x = from_mat(m);
    const auto b = random_vector(n, 4);
    CgConfig cfg;
    cfg.rel_tolerance = 1e-12;
    const auto res = cg_solve_rhs(dense_operator(x), b, cfg);
    EXPECT_LE(res.iterations, n);
    EXPECT_LT(oracle::max_abs_diff(res.f, oracle::solve(m, b)), 1e-7);
}

TEST(Cg, ThetaScalesRightHandSide) {
    const auto m = oracle::random_spd(40, 2);
    const auto y = random_vector(40, 8);
    CgConfig cfg;
    cfg.rel_tolerance = 1e-13;
    const auto res = cg_solve(dense_operator(from_mat(m)), y, 0.25, cfg);
    Vector b = y;
    for (auto& t : b) t *= 0.2;
    EXPECT_LT(oracle::max_abs_diff(res.f, oracle::solve(m, b)), 1e-10);
}

TEST(Cg, ResidualsOrthogonalAndDirectionsConjugate) {
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto m = oracle::random_spd(80, 30 + seed, 0.3);
        const auto x = from_mat(m);
        std::vector<Vector> rs, ps;
        const auto b = random_vector(80, seed);
        rs.push_back(b);  // r0 with f0 = 0
        const auto observer = [&](const CgState& s) {
            ps.emplace_back(s.direction.begin(), s.direction.end());
            rs.emplace_back(s.residual.begin(), s.residual.end());
        };
        CgConfig cfg;
        cfg.rel_tolerance = 1e-14;
        try {
            cg_solve_rhs(dense_operator(x), b, cfg, observer);
        } catch (const NotConverged&) {
        }
        ASSERT_GE(rs.size(), 11u);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = i + 1; j < 10; ++j) {
                EXPECT_LE(std::abs(dot(rs[i], rs[j])), 1e-8 * norm2(rs[i]) * norm2(rs[j]));
                const auto xpj = matvec(x, ps[j]);
                EXPECT_LE(std::abs(dot(ps[i], xpj)), 1e-8 * norm2(ps[i]) * norm2(xpj));
            }
    }
}

TEST(Cg, RecurrenceResidualTracksTrueResidual) {
    const auto m = oracle::random_spd(150, 77, 0.2);
    const auto x = from_mat(m);
    const auto b = random_vector(150, 5);
    const double bn = norm2(b);
    double worst = 0.0;
    const auto observer = [&](const CgState& s) {
        Vector r = b;
        axpy(-1.0, matvec(x, Vector(s.iterate.begin(), s.iterate.end())), r);
        for (std::size_t i = 0; i < r.size(); ++i) worst = std::max(worst, std::abs(r[i] - s.residual[i]));
    };
    CgConfig cfg;
    cfg.rel_tolerance = 1e-13;
    cg_solve_rhs(dense_operator(x), b, cfg, observer);
    EXPECT_LE(worst, 5e-12 * bn);
}

TEST(Cg, FiniteTerminationWithDistinctEigenvalues) {
    // Diagonal with d distinct eigenvalues in [1, 2].
    const std::size_t d = 25;
    DenseMatrix x(d, d);
    for (std::size_t i = 0; i < d; ++i) x(i, i) = 1.0 + double(i) / double(d - 1);
    const auto b = random_vector(d, 1);
    CgConfig cfg;
    cfg.rel_tolerance = 1e-10;
    const auto res = cg_solve_rhs(dense_operator(x), b, cfg);
    EXPECT_LE(res.iterations, d);
    EXPECT_LE(res.final_residual, 1e-10);
}

TEST(Cg, EnergyNormErrorDecreases) {
    const auto m = oracle::random_spd(120, 9, 0.1);
    const auto x = from_mat(m);
    const auto b = random_vector(120, 2);
    const auto exact = oracle::solve(m, b);
    double prev = x_norm_sq(m, exact);  // f0 = 0
    const auto observer = [&](const CgState& s) {
        Vector e(s.iterate.begin(), s.iterate.end());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= exact[i];
        const double cur = x_norm_sq(m, e);
        EXPECT_LE(cur, prev * (1.0 + 1e-12) + 1e-28) << "iteration " << s.iteration;
        prev = cur;
    };
    cg_solve_rhs(dense_operator(x), b, {}, observer);
}

TEST(Cg, InitialIterateIsUsed) {
    const auto x = DenseMatrix::from_rows({{4, 1}, {1, 3}});
    CgConfig cfg;
    cfg.initial = Vector{1.0 / 11.0, 7.0 / 11.0};
    const auto res = cg_solve_rhs(dense_operator(x), Vector{1, 2}, cfg);
    EXPECT_EQ(res.iterations, 0u);
}

TEST(Cg, SparseOperatorMatchesDense) {
    const auto m = oracle::random_spd(60, 3);
    const auto x = from_mat(m);
    const auto s = SparseMatrix::from_dense(x);
    const auto b = random_vector(60, 3);
    const auto a = cg_solve_rhs(dense_operator(x), b);
    const auto c = cg_solve_rhs(sparse_operator(s), b);
    EXPECT_LT(oracle::max_abs_diff(a.f, c.f), 1e-12);
}

TEST(Cg, ExhaustedIterationsCarryBestIterate) {
    const auto m = oracle::random_spd(100, 1, 0.01);
    const auto b = random_vector(100, 1);
    CgConfig cfg;
    cfg.max_iters = 2;
    cfg.rel_tolerance = 1e-14;
    try {
        cg_solve_rhs(dense_operator(from_mat(m)), b, cfg);
        FAIL() << "expected CgNotConverged";
    } catch (const CgNotConverged& e) {
        EXPECT_EQ(e.best_iterate().size(), 100u);
        EXPECT_GT(e.residual(), 0.0);
        EXPECT_LT(e.residual(), 1.0);
    }
}

TEST(Cg, ContractViolations) {
    const auto id = DenseMatrix::identity(3);
    const Vector y{1, 2, 3};
    EXPECT_THROW(cg_solve(dense_operator(id), y, 0.0), InvalidInput);
    EXPECT_THROW(cg_solve(dense_operator(id), y, -1.0), InvalidInput);
    CgConfig bad;
    bad.rel_tolerance = 0.0;
    EXPECT_THROW(cg_solve_rhs(dense_operator(id), y, bad), InvalidInput);

    const auto nonsym = DenseMatrix::from_rows({{2, 1, 0}, {0, 2, 0}, {0, 0, 2}});
    CgConfig probe;
    probe.check_symmetry = true;
    EXPECT_THROW(cg_solve_rhs(dense_operator(nonsym), y, probe), InvalidInput);
    EXPECT_NO_THROW(cg_solve_rhs(dense_operator(id), y, probe));

    const auto indefinite = DenseMatrix::from_rows({{1, 0}, {0, -1}});
    EXPECT_THROW(cg_solve_rhs(dense_operator(indefinite), Vector{0, 1}), NumericalFailure);
}
