#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "../eig.hpp"
#include "../hessian_learner.hpp"
#include "../oqn.hpp"
#include "../problems.hpp"
#include "../trsolver.hpp"
#include "brute_tr.hpp"

namespace oqn {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      // measured statistic
    double threshold = 0.0;  // what it is compared against
    std::string detail;
};

struct VerifySummary {
    std::string level;
    std::vector<CheckResult> checks;
    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
};

// Random symmetric matrix with entries U(lo, hi).
inline Matrix random_symmetric(Index d, RngStream& rng, double lo = -1.0, double hi = 1.0) {
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(lo, hi);
    return a;
}

inline Vector random_ball_vector(Index d, double max_norm, RngStream& rng) {
    return rng.unit_sphere(d) * rng.uniform(0.0, max_norm);
}

inline double spread_of(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[a.rows() - 1] - es.eigenvalues()[0];
}

inline double nuclear_norm(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

namespace verify_detail {

struct Sizes {
    int trials;
    Index max_dim;
};

inline CheckResult check_min_evec(Sizes sz, std::uint64_t seed) {
    RngStream rng(seed);
    const double q = 0.05;
    int sandwich = 0, neg = 0, neg_ok = 0;
    for (int t = 0; t < sz.trials; ++t) {
        const Index d = 2 + static_cast<Index>(rng.uniform(0.0, 1.0) * static_cast<double>(sz.max_dim - 1));
        Matrix a = random_symmetric(d, rng) + rng.uniform(-1.0, 2.0) * Matrix::Identity(d, d);
        const double spread = spread_of(a);
        const double delta = rng.uniform(0.01, 0.3) * std::max(spread, 1e-3);
        SymOperator op(a);
        const auto res = min_evec(op, delta, q, std::max(spread, 1e-12), rng);
        const double lmin = dense_extreme_eig(op).lambda_min;
        if (res.lambda_hat <= lmin + 1e-12 && lmin <= res.lambda_hat + delta) ++sandwich;
        if (res.which == MinEvecCase::NegativeEig) {
            ++neg;
            if ((a * res.v_hat - res.lambda_hat * res.v_hat).norm() <= delta) ++neg_ok;
        }
    }
    const double frac = static_cast<double>(sandwich) / sz.trials;
    CheckResult c{"min_evec_sandwich", frac >= 1.0 - q && neg_ok == neg, frac, 1.0 - q,
                  "negative-case residual " + std::to_string(neg_ok) + "/" + std::to_string(neg)};
    return c;
}

inline CheckResult check_sep(Sizes sz, std::uint64_t seed) {
    RngStream rng(seed);
    const double q = 0.05;
    int good = 0, sep_cases = 0, sep_ok = 0;
    for (int t = 0; t < sz.trials; ++t) {
        const Index d = 2 + static_cast<Index>(rng.uniform(0.0, 1.0) * static_cast<double>(sz.max_dim - 1));
        const double l1 = rng.uniform(0.5, 2.0);
        Matrix w = random_symmetric(d, rng);
        w *= rng.uniform(0.2, 4.0) * l1 / std::max(op_norm(w), 1e-12);
        SymOperator op(w);
        const auto res = sep(op, l1, q, rng);
        if (res.which == SepCase::InsideDoubled) {
            if (op_norm(w) <= 2.0 * l1 + 1e-12) ++good;
        } else {
            ++sep_cases;
            if (op_norm(w / res.gamma) <= 2.0 * l1 + 1e-12) ++good;
            const double lhs = frob_inner(res.s_mat, w) - l1 * nuclear_norm(res.s_mat);
            if (lhs >= res.gamma - 1.0 - 1e-9) ++sep_ok;
        }
    }
    const double frac = static_cast<double>(good) / sz.trials;
    return {"sep_contract", frac >= 1.0 - q && sep_ok == sep_cases, frac, 1.0 - q,
            "separation " + std::to_string(sep_ok) + "/" + std::to_string(sep_cases)};
}

inline CheckResult check_tr(Sizes sz, std::uint64_t seed) {
    RngStream rng(seed);
    int ok = 0;
    double worst = -1e300;
    const double radii[] = {0.1, 1.0, 10.0};
    const double deltas[] = {1e-2, 1e-4};
    for (int t = 0; t < sz.trials; ++t) {
        const Index d = 2 + static_cast<Index>(rng.uniform(0.0, 1.0) * static_cast<double>(sz.max_dim - 1));
        const Matrix a = random_symmetric(d, rng);
        const Vector b = random_ball_vector(d, 5.0, rng);
        const double radius = radii[t % 3];
        const double delta = deltas[(t / 3) % 2];
        SymOperator op(a);
        TrustRegionSubproblem<SymOperator> p;
        p.a_op = &op;
        p.b = b;
        p.radius = radius;
        p.delta = delta;
        p.q = 0.01;
        p.b_bound = 2.0 * a.norm();
        const auto sol = tr_solve(p, rng);
        const auto ex = brute_tr(a, b, radius);
        const double val = 0.5 * sol.delta_vec.dot(a * sol.delta_vec) + b.dot(sol.delta_vec);
        const double excess = val - ex.value - delta * radius - 1e-9;
        worst = std::max(worst, excess);
        if (sol.delta_vec.norm() <= radius * (1.0 + 1e-12) && sol.residual <= delta && excess <= 0.0)
            ++ok;
    }
    return {"tr_solve_vs_brute", ok == sz.trials, static_cast<double>(ok), static_cast<double>(sz.trials),
            "worst objective excess " + std::to_string(worst)};
}

inline CheckResult check_fd(int points, std::uint64_t seed) {
    RngStream rng(seed);
    double worst_g = 0.0, worst_h = 0.0;
    for (const auto& name : catalog_names()) {
        const ObjectiveSpec s = catalog(name, 6, 3);
        for (int i = 0; i < points; ++i) {
            Vector x(s.dim);
            for (Index j = 0; j < s.dim; ++j) x[j] = rng.uniform(-s.domain_radius, s.domain_radius);
            worst_g = std::max(worst_g, fd_check_gradient(s, x));
            worst_h = std::max(worst_h, fd_check_hessian(s, x));
        }
    }
    return {"finite_differences", worst_g <= 1e-6 && worst_h <= 1e-4, worst_g, 1e-6,
            "hessian " + std::to_string(worst_h)};
}

inline CheckResult check_learner(int steps, std::uint64_t seed) {
    RngStream rng(seed);
    const Index d = 6;
    const double l1 = 1.0, dr = 0.5;
    LearnerState st = learner_init(d, l1, default_rho(dr), 0.01, rng);
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < steps; ++i) {
        QuadLoss ql{rng.unit_sphere(d) * rng.uniform(0.0, 3.0), random_ball_vector(d, dr, rng)};
        learner_step(st, ql, rng);
        const double ratio = st.w_mat.frobenius_norm() / (std::sqrt(static_cast<double>(d)) * l1);
        worst = std::max(worst, ratio);
        if (ratio > 1.0 + 1e-9) ok = false;
    }
    return {"learner_frobenius_feasibility", ok, worst, 1.0, ""};
}

inline CheckResult check_regret_run(Index d, std::int64_t m, std::uint64_t seed) {
    const ObjectiveSpec s = catalog("cosine_mixture", d, 1);
    const HyperParams p = compute_hyperparams(s, m);
    RngStream rng(seed);
    RunOptions opt;
    opt.audit = AuditLevel::Full;
    const RunReport r = run(s, p, rng, opt);
    return {"regret_audits_d" + std::to_string(d) + "_M" + std::to_string(m), r.audits.all_ok,
            r.audits.shifting_regret.margin, 0.0,
            "gradients " + std::to_string(r.gradients)};
}

}  // namespace verify_detail

inline VerifySummary verify_suite(const std::string& level) {
    using namespace verify_detail;
    VerifySummary out;
    out.level = level;
    if (level == "quick") {
        out.checks.push_back(check_min_evec({200, 10}, 11));
        out.checks.push_back(check_sep({200, 10}, 12));
        out.checks.push_back(check_tr({100, 10}, 13));
        out.checks.push_back(check_fd(20, 14));
        out.checks.push_back(check_learner(200, 15));
    } else if (level == "full") {
        out.checks.push_back(check_min_evec({1000, 50}, 21));
        out.checks.push_back(check_sep({1000, 50}, 22));
        out.checks.push_back(check_tr({500, 20}, 23));
        out.checks.push_back(check_fd(100, 24));
        out.checks.push_back(check_learner(1000, 25));
        out.checks.push_back(check_regret_run(10, 1000, 26));
    } else {
        throw Error(ErrorCode::UnknownLevel, "level '" + level + "' (expected quick or full)");
    }
    return out;
}

} // namespace oqn
