#include <gtest/gtest.h>

#include <oqn/harness/brute_tr.hpp>
#include <oqn/trsolver.hpp>

#include <random>

#include "support/oracles.hpp"

using namespace oqn;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Matrix diag(std::initializer_list<double> d) { return vec(d).asDiagonal(); }

Matrix random_psd(Index d, std::mt19937_64& eng) {
    const Matrix g = oracle::random_sym(d, eng);
    return g * g / static_cast<double>(d);
}

TrustRegionSubproblem<SymOperator> make_problem(const SymOperator& a, const Vector& b, double radius,
                                                double delta) {
    TrustRegionSubproblem<SymOperator> p;
    p.a_op = &a;
    p.b = b;
    p.radius = radius;
    p.delta = delta;
    p.q = 0.01;
    const double nrm = oracle::op_norm(a.dense());
    p.b_bound = std::max(2.0 * nrm, 1e-3);
    p.lmax_bound = std::max(nrm, 1e-3);
    return p;
}

}  // namespace

TEST(ResidualOf, Examples) {
    EXPECT_EQ(residual_of(SymOperator::identity(2), Vector::Zero(2), 1.0, Vector::Zero(2)), 0.0);
    EXPECT_NEAR(residual_of(SymOperator(diag({2, 1})), vec({-4, 0}), 1.0, vec({1, 0})), 0.0, 1e-15);
    EXPECT_NEAR(residual_of(SymOperator(diag({-1, 1})), vec({0, 0}), 1.0, vec({1, 0})), 0.0, 1e-15);
}

TEST(ResidualOf, InteriorAndOneMatvec) {
    const SymOperator a(diag({2, 1}));
    EXPECT_NEAR(residual_of(a, vec({1, 1}), 1.0, vec({0.5, 0})), std::sqrt(5.0), 1e-15);
    EXPECT_EQ(a.matvec_count(), 1u);
}

TEST(ResidualOf, BoundaryGradientPointingOutward) {
    // r is parallel to delta, so c* = 0 and nothing cancels.
    const SymOperator a(diag({1, 1}));
    EXPECT_NEAR(residual_of(a, vec({3, 0}), 1.0, vec({1, 0})), 4.0, 1e-15);
}

TEST(ResidualOf, OutsideBall) {
    try {
        residual_of(SymOperator::identity(2), Vector::Zero(2), 1.0, vec({1.1, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideBall);
    }
}

TEST(Fista, ZeroIsFixedPoint) {
    const auto x = fista(SymOperator::identity(3), Vector::Zero(3), 1.0, 1.0, 10, Vector::Zero(3));
    EXPECT_EQ(x.norm(), 0.0);
}

TEST(Fista, OneDimConstrained) {
    const SymOperator a(Matrix::Constant(1, 1, 1.0));
    const Vector b = vec({-2});
    const Vector x = fista(a, b, 1.0, 1.0, 50, Vector::Zero(1));
    EXPECT_NEAR(x[0], 1.0, 1e-12);
    const double gap = tr_objective(a, b, x) - (-1.5);
    EXPECT_LE(gap, 2.0 / (51.0 * 51.0));
    EXPECT_EQ(a.matvec_count(), 50u + 1u);
}

TEST(Fista, RandomPsdInteriorMatchesLinearSolve) {
    std::mt19937_64 eng(3);
    for (int t = 0; t < 20; ++t) {
        Matrix m = random_psd(5, eng) + 0.5 * Matrix::Identity(5, 5);
        const Vector b = oracle::random_vec(5, eng);
        const Vector xs = -m.ldlt().solve(b);
        const SymOperator a(m);
        const double lg = oracle::op_norm(m);
        for (std::size_t n : {10u, 40u, 160u}) {
            const Vector x = fista(a, b, 10.0, lg, n, Vector::Zero(5));
            const double gap = tr_objective(a, b, x) - tr_objective(a, b, xs);
            EXPECT_LE(gap, 2.0 * lg * xs.squaredNorm() / std::pow(n + 1.0, 2) + 1e-12);
        }
    }
}

TEST(Sfg, ZeroStart) {
    const auto x = sfg(SymOperator::identity(2), Vector::Zero(2), 1.0, 1.0, 4, Vector::Zero(2));
    EXPECT_EQ(x.norm(), 0.0);
}

TEST(Sfg, TooFewIterations) {
    try {
        sfg(SymOperator::identity(2), vec({1, 0}), 1.0, 1.0, 1, Vector::Zero(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IterBudgetTooSmall);
    }
}

TEST(Sfg, OneDimBoundary) {
    const SymOperator a(Matrix::Constant(1, 1, 1.0));
    const Vector b = vec({-2});
    const Vector x = sfg(a, b, 1.0, 1.0, 8, Vector::Zero(1));
    const double gap0 = 0.0 - (-1.5);
    EXPECT_LE(residual_of(a, b, 1.0, x), std::sqrt(50.0 * gap0 / (9.0 * 10.0)));
}

TEST(Sfg, ResidualBoundRandomPsd) {
    std::mt19937_64 eng(4);
    for (int t = 0; t < 25; ++t) {
        const Matrix m = random_psd(5, eng);
        const Vector b = 3.0 * oracle::random_vec(5, eng);
        const SymOperator a(m);
        const double lg = std::max(oracle::op_norm(m), 1e-6);
        const double radius = 1.0 + t % 3;
        const double fstar = brute_tr(m, b, radius).value;
        for (std::size_t n : {4u, 8u, 16u, 32u}) {
            const Vector x = sfg(a, b, radius, lg, n, Vector::Zero(5));
            const double gap0 = 0.0 - fstar;
            const double bound = std::sqrt(50.0 * lg * gap0 / ((n + 1.0) * (n + 2.0)));
            EXPECT_LE(residual_of(a, b, radius, x), bound + 1e-12) << "t=" << t << " n=" << n;
        }
    }
}

TEST(FistaPlusSfg, Examples) {
    EXPECT_EQ(fista_plus_sfg(SymOperator::identity(2), Vector::Zero(2), 1.0, 1e-4, 1.0).norm(), 0.0);
    const SymOperator a(diag({2, 1}));
    const Vector b = vec({-4, 0});
    const Vector x = fista_plus_sfg(a, b, 1.0, 1e-4, 2.0);
    EXPECT_NEAR(x[0], 1.0, 1e-4);
    EXPECT_NEAR(x[1], 0.0, 1e-4);
    EXPECT_LE(residual_of(a, b, 1.0, x), 1e-4);
}

TEST(FistaPlusSfg, RandomPsdResidual) {
    std::mt19937_64 eng(5);
    int ok = 0;
    for (int t = 0; t < 500; ++t) {
        const Index d = 2 + t % 19;
        const Matrix m = random_psd(d, eng);
        const Vector b = oracle::random_vec(d, eng, -2, 2);
        const SymOperator a(m);
        const double radius = (t % 3 == 0) ? 0.1 : (t % 3 == 1 ? 1.0 : 10.0);
        const double delta = (t % 2) ? 1e-2 : 1e-4;
        const double lg = std::max(oracle::op_norm(m), 1e-6);
        std::size_t n = 0;
        const Vector x = fista_plus_sfg(a, b, radius, delta, lg, 1.0, &n);
        EXPECT_EQ(a.matvec_count(), 2 * n);
        if (residual_of(a, b, radius, x) <= delta) ++ok;
    }
    EXPECT_EQ(ok, 500);
}

TEST(TrSolve, IdentityZero) {
    RngStream rng(1);
    const auto a = SymOperator::identity(2);
    const auto s = tr_solve(make_problem(a, Vector::Zero(2), 1.0, 1e-6), rng);
    EXPECT_EQ(s.branch, TrBranch::Convex);
    EXPECT_EQ(s.delta_vec.norm(), 0.0);
}

TEST(TrSolve, ConvexBoundary) {
    RngStream rng(2);
    const SymOperator a(diag({2, 1}));
    const auto s = tr_solve(make_problem(a, vec({-4, 0}), 1.0, 1e-6), rng);
    EXPECT_EQ(s.branch, TrBranch::Convex);
    EXPECT_NEAR(s.delta_vec[0], 1.0, 1e-5);
    EXPECT_NEAR(s.delta_vec[1], 0.0, 1e-5);
    EXPECT_LE(s.residual, 1e-6);
}

TEST(TrSolve, NegativeCurvature) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        const SymOperator a(diag({-1, 1}));
        const auto s = tr_solve(make_problem(a, Vector::Zero(2), 1.0, 1e-6), rng);
        EXPECT_NE(s.branch, TrBranch::Convex);
        EXPECT_NEAR(std::abs(s.delta_vec[0]), 1.0, 1e-4);
        EXPECT_NEAR(tr_objective(a, Vector::Zero(2), s.delta_vec), -0.5, 1e-6);
        EXPECT_LE(s.residual, 1e-6);
    }
}

TEST(TrSolve, InvalidInputs) {
    RngStream rng(3);
    const auto a = SymOperator::identity(2);
    auto p = make_problem(a, Vector::Zero(2), 1.0, 1e-6);
    p.radius = 0.0;
    EXPECT_THROW(tr_solve(p, rng), Error);
    p = make_problem(a, Vector::Zero(2), 1.0, 0.0);
    EXPECT_THROW(tr_solve(p, rng), Error);
    p = make_problem(a, Vector::Zero(3), 1.0, 1e-6);
    EXPECT_THROW(tr_solve(p, rng), Error);
}

TEST(TrSolve, RandomAgainstBruteForce) {
    std::mt19937_64 eng(2024);
    RngStream rng(2024);
    const double radii[] = {0.1, 1.0, 10.0};
    const double deltas[] = {1e-2, 1e-4};
    for (int t = 0; t < 500; ++t) {
        const Index d = 2 + t % 19;
        const Matrix m = oracle::random_sym(d, eng);
        Vector b = oracle::random_vec(d, eng);
        b *= std::uniform_real_distribution<double>(0.0, 5.0)(eng) / b.norm();
        const double radius = radii[t % 3];
        const double delta = deltas[(t / 3) % 2];
        const SymOperator a(m);
        const auto p = make_problem(a, b, radius, delta);
        const auto s = tr_solve(p, rng);
        const auto ref = brute_tr(m, b, radius);
        EXPECT_LE(s.delta_vec.norm(), radius);
        EXPECT_LE(s.residual, delta);
        EXPECT_NEAR(s.residual, residual_of(SymOperator(m), b, radius, s.delta_vec), 1e-12);
        const double val = 0.5 * s.delta_vec.dot(m * s.delta_vec) + b.dot(s.delta_vec);
        EXPECT_LE(val, ref.value + delta * radius + 1e-9) << "t=" << t;
        if (!s.retried) {
            EXPECT_LE(static_cast<double>(s.matvecs_used),
                      tr_matvec_bound(d, p.b_bound, radius, delta, p.q, s.lg));
        }
        if (s.branch == TrBranch::RegularizedInterior) {
            EXPECT_LE(std::abs(s.delta_vec.norm() - radius), 1e-10 * radius);
        }
    }
}

TEST(BruteTr, TwoDimAgainstGrid) {
    std::mt19937_64 eng(8);
    for (int t = 0; t < 10; ++t) {
        const Matrix m = oracle::random_sym(2, eng);
        const Vector b = oracle::random_vec(2, eng);
        const auto r = brute_tr(m, b, 1.0);
        const double g = oracle::grid_tr_min_2d(m, b, 1.0, 2e-3);
        EXPECT_LE(r.value, g + 1e-12);
        EXPECT_NEAR(r.value, g, 1e-4);
    }
}

TEST(ProjectBall, NeverLeavesTheBall) {
    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 20000; ++t) {
        const Vector x = oracle::random_vec(1 + t % 20, eng, -10, 10);
        const double r = std::pow(10.0, u(eng));
        const Vector y = project_ball(x, r);
        EXPECT_LE(y.norm(), r);
        if (x.norm() > r) {
            EXPECT_NEAR(y.norm(), r, 1e-14 * r);
        }
    }
}
