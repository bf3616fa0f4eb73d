#include <gtest/gtest.h>

#include <oqn/oqn.hpp>

#include <boost/multiprecision/cpp_dec_float.hpp>

using namespace oqn;

namespace {

ObjectiveSpec half_norm(Index d) { return catalog("quadratic", d, 0); }

}  // namespace

TEST(Hyperparams, UnitInstance) {
    const auto p = compute_hyperparams_from(52.0, 1, 1.0, 1.0, 1, 0.01);
    EXPECT_NEAR(p.d_radius, 1.0, 1e-15);
    EXPECT_NEAR(p.eta, std::pow(1.0 / 24.0, 0.6), 1e-15);
    EXPECT_NEAR(p.eta, 0.148550, 1e-6);
    EXPECT_EQ(p.t_len, 6);
    // K is at least 1, so M = T exceeds the requested budget here.
    EXPECT_EQ(p.k_eps, 1);
    EXPECT_EQ(p.m_total, 6);
    EXPECT_NEAR(p.delta_tr, 1.0 / (p.eta * 6.0), 1e-14);
    EXPECT_TRUE(p.auto_computed);
}

TEST(Hyperparams, HighPrecisionOracle) {
    using big = boost::multiprecision::cpp_dec_float_50;
    const big gap = 1, d = 4, l1 = 2, l2 = 1, m = 1000;
    const big dr = pow(gap / (52 * pow(d, big("0.4")) * pow(l1, big("0.4")) * pow(l2, big("0.6")) * m),
                       big(5) / 13);
    const big eta =
        pow(1 / (24 * d * l1 * pow(l2, big(2) / 3) * pow(dr, big(2) / 3)), big(3) / 5);
    const big t_raw = 3 / cbrt(dr * l2 * eta);
    const auto t = static_cast<std::int64_t>(round(t_raw));
    const std::int64_t k = 1000 / t;
    const big delta = dr / (eta * t);

    const auto p = compute_hyperparams_from(1.0, 4, 2.0, 1.0, 1000, 0.01);
    EXPECT_NEAR(p.d_radius, dr.convert_to<double>(), 1e-14 * p.d_radius);
    EXPECT_NEAR(p.eta, eta.convert_to<double>(), 1e-14 * p.eta);
    EXPECT_EQ(p.t_len, t);
    EXPECT_EQ(p.k_eps, k);
    EXPECT_EQ(p.m_total, k * t);
    EXPECT_NEAR(p.delta_tr, delta.convert_to<double>(), 1e-13 * p.delta_tr);

    // Closed form of eta in M, gap, d, L1, L2 agrees up to a constant factor.
    const big closed = pow(m, big(2) / 13) /
                       (pow(gap, big(2) / 13) * pow(d, big(7) / 13) * pow(l1, big(7) / 13) *
                        pow(l2, big(4) / 13));
    const big ratio = eta / closed;
    const auto p2 = compute_hyperparams_from(3.0, 9, 1.5, 0.7, 5000, 0.01);
    const big closed2 = pow(big(5000), big(2) / 13) /
                        (pow(big(3), big(2) / 13) * pow(big(9), big(7) / 13) *
                         pow(big("1.5"), big(7) / 13) * pow(big("0.7"), big(4) / 13));
    EXPECT_NEAR(p2.eta / closed2.convert_to<double>(), ratio.convert_to<double>(), 1e-12);
}

TEST(Hyperparams, Errors) {
    try {
        compute_hyperparams(half_norm(2), 100);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroL2);
    }
    auto s = catalog("cosine_mixture", 3, 0);
    s.value.reset();
    try {
        compute_hyperparams(s, 100);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoGapEstimate);
    }
    EXPECT_NO_THROW(compute_hyperparams(s, 100, 0.01, 2.0));
    EXPECT_THROW(manual_params(0.1, 1.0, 2, 0, 1e-3), Error);
    EXPECT_THROW(manual_params(-0.1, 1.0, 2, 2, 1e-3), Error);
}

TEST(Init, Example) {
    auto s = half_norm(2);
    s.x0 = Vector::Zero(2);
    s.x0[0] = 1.0;
    RngStream rng(1);
    const auto st = init(s, manual_params(0.1, 1.0, 1, 1, 1e-6), rng);
    EXPECT_NEAR(st.delta_vec[0], -0.1, 1e-16);
    EXPECT_EQ(st.delta_vec[1], 0.0);
    EXPECT_EQ(st.hint, s.x0);
    EXPECT_EQ(st.grads.gradients, 1u);
    EXPECT_EQ(st.learner->b_mat.dense().norm(), 0.0);
}

TEST(Init, StationaryStart) {
    auto s = catalog("cosine_mixture", 3, 0);
    s.x0 = Vector::Zero(3);
    RngStream rng(1);
    try {
        init(s, manual_params(0.1, 1.0, 1, 1, 1e-6), rng);
        FAIL();
    } catch (const StationaryStartError& e) {
        EXPECT_EQ(e.code(), ErrorCode::StationaryStart);
    }
    RngStream rng2(1);
    const auto rep = run(s, manual_params(0.1, 1.0, 2, 2, 1e-6), rng2);
    EXPECT_TRUE(rep.stationary_start);
    EXPECT_EQ(rep.gradients, 1u);
    EXPECT_EQ(rep.episodes.size(), 1u);
    EXPECT_LE(rep.grad_norm_final, 1e-14 * s.l1);
    EXPECT_TRUE(rep.audits.all_ok);
}

TEST(Step, OneDimHandTrace) {
    const auto s = half_norm(1);
    ASSERT_EQ(s.x0[0], 1.0);
    RngStream rng(3);
    const auto p = manual_params(0.1, 1.0, 1, 3, 1e-9);
    auto st = init(s, p, rng);
    const auto out = step(st, s, p, rng, AuditLevel::Full);
    EXPECT_NEAR(st.x[0], 0.9, 1e-15);
    EXPECT_NEAR(st.grad_z_prev[0], 0.85, 1e-15);
    EXPECT_NEAR(out.log.g_dot_delta, -0.095, 1e-15);
    EXPECT_NEAR(st.delta_vec[0], -0.1, 1e-9);
    // h_2 = grad f(z_1) + B_1(Delta_2 - Delta_1)/2 with B_1 = 0.
    EXPECT_NEAR(st.hint[0], 0.85, 1e-15);
}

TEST(Step, CountingInvariant) {
    const auto s = catalog("cosine_mixture", 4, 0);
    const auto p = compute_hyperparams(s, 120);
    RngStream rng(4);
    auto st = init(s, p, rng);
    for (std::int64_t n = 1; n <= p.m_total; ++n) {
        const auto out = step(st, s, p, rng);
        EXPECT_EQ(st.grads.gradients,
                  static_cast<std::uint64_t>(1 + 2 * n + st.episodes_closed));
        EXPECT_LE(st.delta_vec.norm(), p.d_radius * (1 + 1e-12));
        EXPECT_EQ(out.episode.has_value(), n % p.t_len == 0);
    }
    EXPECT_THROW(step(st, s, p, rng), Error);
}

TEST(Step, HintIdentity) {
    const auto s = catalog("coupled_trig", 5, 0);
    const auto p = compute_hyperparams(s, 200);
    RngStream rng(5);
    const auto rep = run(s, p, rng, {Method::Oqn, AuditLevel::Full, std::nullopt});
    ASSERT_TRUE(rep.audits.hint_identity.available);
    EXPECT_TRUE(rep.audits.hint_identity.ok) << rep.audits.hint_identity.lhs;
}

TEST(Run, CountingAndSepCalls) {
    for (auto method : {Method::Oqn, Method::OgBaseline})
        for (auto audit : {AuditLevel::Off, AuditLevel::Episode, AuditLevel::Full}) {
            const auto s = catalog("cosine_mixture", 4, 0);
            const auto p = compute_hyperparams(s, 120);
            RngStream rng(6);
            const auto rep = run(s, p, rng, {method, audit, std::nullopt});
            EXPECT_EQ(rep.gradients, static_cast<std::uint64_t>(2 * p.m_total + p.k_eps + 1));
            EXPECT_EQ(rep.episodes.size(), static_cast<std::size_t>(p.k_eps));
            EXPECT_TRUE(rep.audits.counting.ok);
            if (method == Method::Oqn) {
                EXPECT_EQ(rep.sep_calls, static_cast<std::uint64_t>(p.m_total));
                EXPECT_EQ(rep.tr.calls, static_cast<std::uint64_t>(p.m_total));
            } else {
                EXPECT_EQ(rep.sep_calls, 0u);
                EXPECT_EQ(rep.matvecs, 0u);
            }
        }
}

TEST(Run, BestEpisodeSelection) {
    const auto s = catalog("cosine_mixture", 4, 0);
    const auto p = compute_hyperparams(s, 120);
    RngStream rng(7);
    const auto rep = run(s, p, rng);
    double best = rep.episodes.front().grad_norm_at_wbar;
    for (const auto& e : rep.episodes) best = std::min(best, e.grad_norm_at_wbar);
    EXPECT_EQ(rep.grad_norm_final, best);
    EXPECT_EQ(rep.w_hat, rep.episodes[static_cast<std::size_t>(rep.best_k - 1)].w_bar);
}

TEST(Run, EpsilonStop) {
    const auto s = catalog("cosine_mixture", 4, 0);
    const auto p = compute_hyperparams(s, 600);
    RngStream rng(8);
    const auto rep = run(s, p, rng, {Method::Oqn, AuditLevel::Episode, 1e9});
    EXPECT_EQ(rep.episodes.size(), 1u);
    EXPECT_EQ(rep.steps_done, p.t_len);
    EXPECT_EQ(rep.gradients, static_cast<std::uint64_t>(2 * p.t_len + 2));
}

TEST(Run, Determinism) {
    const auto s = catalog("coupled_trig", 6, 0);
    const auto p = compute_hyperparams(s, 150);
    RngStream r1(9), r2(9);
    const auto a = run(s, p, r1);
    const auto b = run(s, p, r2);
    EXPECT_EQ(a.w_hat, b.w_hat);
    EXPECT_EQ(a.matvecs, b.matvecs);
    EXPECT_EQ(a.rng_draws, b.rng_draws);
}

TEST(Run, QuadraticIdentityAndMonotone) {
    const auto s = half_norm(2);
    const auto p = manual_params(0.02, 1.0, 4, 10, 0.005);
    RngStream rng(10);
    const auto rep = run(s, p, rng, {Method::Oqn, AuditLevel::Full, std::nullopt});
    for (const auto& st : rep.steps)
        EXPECT_LE(std::abs(st.f_prev - st.f_cur + st.g_dot_delta), 1e-10 * (1 + std::abs(st.f_cur)));
    for (std::size_t k = 1; k < rep.episodes.size(); ++k)
        EXPECT_LT(rep.episodes[k].grad_norm_at_wbar, rep.episodes[k - 1].grad_norm_at_wbar);
    EXPECT_TRUE(rep.audits.all_ok);
}

TEST(Run, OgAgreesWithFirstOqnStep) {
    const auto s = catalog("cosine_mixture", 5, 0);
    const auto p = compute_hyperparams(s, 240);
    RngStream r1(11), r2(11);
    auto a = init(s, p, r1, Method::Oqn);
    auto b = init(s, p, r2, Method::OgBaseline);
    step(a, s, p, r1);
    step(b, s, p, r2);
    // B_1 = 0 makes the TR problem strongly convex with minimizer the OG update.
    EXPECT_LE((a.delta_vec - b.delta_vec).norm(), p.eta * p.delta_tr);
}

TEST(Audit, SingleEpisodeRegretNonnegative) {
    const auto s = catalog("cosine_mixture", 3, 0);
    const auto p = manual_params(0.05, 0.5, 1, 1, 1e-3);
    RngStream rng(12);
    const auto rep = run(s, p, rng);
    ASSERT_EQ(rep.episodes.size(), 1u);
    EXPECT_GE(rep.episodes[0].episode_regret, 0.0);
    EXPECT_NEAR(rep.episodes[0].u_k.norm(), p.d_radius, 1e-15);
}

TEST(Audit, MissingValueOracle) {
    auto s = catalog("cosine_mixture", 3, 0);
    s.value.reset();
    const auto p = manual_params(0.05, 0.5, 2, 2, 1e-3);
    RngStream rng(13);
    const auto rep = run(s, p, rng);
    EXPECT_THROW(audit_regret(rep, true), Error);
    EXPECT_FALSE(rep.audits.descent.available);
}

TEST(Audit, CosineMixtureFull) {
    for (Index d : {4, 10}) {
        const auto s = catalog("cosine_mixture", d, 0);
        const auto p = compute_hyperparams(s, 120);
        RngStream rng(14);
        const auto rep = run(s, p, rng, {Method::Oqn, AuditLevel::Full, std::nullopt});
        const auto& a = rep.audits;
        EXPECT_TRUE(a.shifting_regret.ok) << a.shifting_regret.margin;
        EXPECT_TRUE(a.episode_gradient.ok);
        EXPECT_TRUE(a.dynamic_regret.ok);
        EXPECT_TRUE(a.comparator_loss.ok);
        EXPECT_TRUE(a.comparator_path.ok);
        EXPECT_TRUE(a.surrogate.ok);
        EXPECT_TRUE(a.tr_matvecs.ok);
        EXPECT_TRUE(a.sep_matvecs.ok);
        EXPECT_TRUE(a.fixed_point.ok);
        EXPECT_TRUE(a.delta_norm.ok);
        EXPECT_TRUE(a.average_gradient.ok);
        EXPECT_GE(a.descent_midpoint.margin, 0.0);
    }
}

TEST(Audit, MidpointErrorOnCubicIsOneTwentyFourth) {
    // f = x^3/6 has third derivative 1 = L2; the midpoint gradient misses the increment by h^3/24.
    const auto value = [](double x) { return x * x * x / 6.0; };
    const auto grad = [](double x) { return 0.5 * x * x; };
    const double l2 = 1.0, x = 1.0, h = 0.1;
    const double err = value(x + h) - value(x) - grad(x + h / 2) * h;
    EXPECT_NEAR(err, h * h * h / 24.0, 1e-15);
    EXPECT_GT(err, l2 * h * h * h / 48.0);
}
