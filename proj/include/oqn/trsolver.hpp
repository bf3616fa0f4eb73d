#pragma once

#include <cmath>
#include <optional>

#include "eig.hpp"
#include "linops.hpp"
#include "rng.hpp"

namespace oqn {

enum class TrBranch { Convex, RegularizedInterior, RegularizedBoundary };

inline const char* to_string(TrBranch b) {
    switch (b) {
        case TrBranch::Convex: return "convex";
        case TrBranch::RegularizedInterior: return "regularized_interior";
        case TrBranch::RegularizedBoundary: return "regularized_boundary";
    }
    return "?";
}

template <class Op>
struct TrustRegionSubproblem {
    const Op* a_op = nullptr;
    Vector b;
    double radius = 1.0;
    double delta = 1e-6;
    double q = 0.01;
    double b_bound = 1.0;                  // >= max{lmax - lmin, lmax}
    std::optional<double> lmax_bound;      // Lipschitz constant for the convex branch
};

struct TRSolution {
    Vector delta_vec;
    double residual = 0.0;
    std::uint64_t matvecs_used = 0;
    TrBranch branch = TrBranch::Convex;
    double lambda_hat = 0.0;
    std::size_t lanczos_steps = 0;
    std::size_t grad_iters = 0;   // N used by each of the FISTA and SFG phases
    double lg = 0.0;
    bool retried = false;
};

inline constexpr double kBoundaryTol = 1e-12;

// min over the normal cone at delta_vec of ||A delta + b + v||. One matvec.
template <class Op>
double residual_of(const Op& a, const Vector& b, double radius, const Vector& delta_vec) {
    require_dim(b, a.dim(), "residual_of b");
    const double nd = delta_vec.norm();
    if (nd > radius * (1.0 + kBoundaryTol))
        throw Error(ErrorCode::OutsideBall,
                    "norm " + std::to_string(nd) + " > radius " + std::to_string(radius));
    const Vector r = a.apply(delta_vec) + b;
    if (nd < radius * (1.0 - kBoundaryTol)) return r.norm();
    const double c = std::max(0.0, -r.dot(delta_vec) / (nd * nd));
    return (r + c * delta_vec).norm();
}

template <class Op>
double tr_objective(const Op& a, const Vector& b, const Vector& x) {
    return 0.5 * x.dot(a.apply(x)) + b.dot(x);
}

// Projected FISTA on g(x) = x'Ax/2 + b'x over the ball. One matvec per iteration.
template <class Op>
Vector fista(const Op& a, const Vector& b, double radius, double lg, std::size_t n_iters,
             const Vector& x_start) {
    Vector x = x_start;
    Vector y = x_start;
    double t = 1.0;
    for (std::size_t k = 0; k < n_iters; ++k) {
        const Vector grad = a.apply(y) + b;
        Vector x_next = project_ball(y - grad / lg, radius);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x_next + ((t - 1.0) / t_next) * (x_next - x);
        x = std::move(x_next);
        t = t_next;
    }
    return x;
}

// Super FISTA-G: drives the normal-cone residual down from a warm start.
template <class Op>
Vector sfg(const Op& a, const Vector& b, double radius, double lg, std::size_t n_iters,
           const Vector& x_start) {
    if (n_iters < 2)
        throw Error(ErrorCode::IterBudgetTooSmall, "sfg needs at least 2 iterations");
    const double nn = static_cast<double>(n_iters);
    Vector x_prev = x_start;  // x~_k
    Vector y = x_start;       // y~_k
    Vector x;
    for (std::size_t k = 0; k < n_iters; ++k) {
        const Vector grad = a.apply(y) + b;
        x = project_ball(y - grad / (4.0 * lg), radius);
        if (k + 1 == n_iters) break;
        const double kk = static_cast<double>(k);
        double c1, c2;
        if (k + 2 == n_iters) {
            c1 = 3.0 / 10.0;
            c2 = 3.0 / 40.0;
        } else {
            const double den = (nn - kk + 2.0) * (2.0 * nn - 2.0 * kk - 1.0);
            c1 = (nn - kk) * (2.0 * nn - 2.0 * kk - 3.0) / den;
            c2 = (4.0 * nn - 4.0 * kk - 5.0) * (2.0 * nn - 2.0 * kk - 3.0) / (6.0 * den);
        }
        Vector y_next = x + c1 * (x - x_prev) + c2 * (x - y);
        x_prev = x;
        y = std::move(y_next);
    }
    return x;
}

inline std::size_t fista_sfg_iters(double lg, double radius, double delta, double scale = 1.0) {
    const double n = std::ceil(std::sqrt(10.0 * lg * radius / delta)) * scale;
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(n)));
}

// N FISTA steps from 0 followed by N SFG steps.
template <class Op>
Vector fista_plus_sfg(const Op& a, const Vector& b, double radius, double delta, double lg,
                      double scale = 1.0, std::size_t* iters_out = nullptr) {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidDelta, "delta must be positive");
    const Index d = a.dim();
    require_dim(b, d, "fista_plus_sfg b");
    if (b.squaredNorm() == 0.0) {
        if (iters_out) *iters_out = 0;
        return Vector::Zero(d);
    }
    const std::size_t n = fista_sfg_iters(lg, radius, delta, scale);
    if (iters_out) *iters_out = n;
    const Vector x0 = fista(a, b, radius, lg, n, Vector::Zero(d));
    return sfg(a, b, radius, lg, n, x0);
}

namespace detail {

template <class Op>
TRSolution tr_attempt(const TrustRegionSubproblem<Op>& p, RngStream& rng, double scale) {
    const Op& a = *p.a_op;
    const double radius = p.radius;
    TRSolution sol;

    const auto me = min_evec(a, p.delta / (2.0 * radius), 0.5 * p.q, p.b_bound, rng, scale);
    sol.lambda_hat = me.lambda_hat;
    sol.lanczos_steps = me.steps;

    if (me.lambda_hat >= 0.0) {
        sol.lg = p.lmax_bound.value_or(p.b_bound);
        sol.delta_vec = fista_plus_sfg(a, p.b, radius, p.delta, sol.lg, scale, &sol.grad_iters);
        sol.branch = TrBranch::Convex;
    } else {
        ShiftedOperator<Op> shifted(a, me.lambda_hat);
        sol.lg = p.b_bound - me.lambda_hat;
        Vector dt = fista_plus_sfg(shifted, p.b, radius, 0.5 * p.delta, sol.lg, scale,
                                   &sol.grad_iters);
        const double nd = dt.norm();
        if (nd >= radius * (1.0 - 1e-9)) {
            sol.delta_vec = scale_to_radius(dt, radius);
            sol.branch = TrBranch::RegularizedBoundary;
        } else {
            // Move along +-v to the sphere using the root of smaller magnitude.
            Vector v = me.v_hat;
            double c = dt.dot(v);
            if (c < 0.0) {
                v = -v;
                c = -c;
            }
            const double gap = radius * radius - nd * nd;
            const double alpha = gap / (std::sqrt(c * c + gap) + c);
            sol.delta_vec = dt + alpha * v;
            const double n2 = sol.delta_vec.norm();
            if (n2 > radius) sol.delta_vec = scale_to_radius(sol.delta_vec, radius);
            sol.branch = TrBranch::RegularizedInterior;
        }
    }
    sol.residual = residual_of(a, p.b, radius, sol.delta_vec);
    return sol;
}

}  // namespace detail

// Inexact trust-region solve. The returned residual is certified <= delta or the
// call throws CertificateFailure after one retry with doubled budgets.
template <class Op>
TRSolution tr_solve(const TrustRegionSubproblem<Op>& p, RngStream& rng) {
    if (p.a_op == nullptr) throw Error(ErrorCode::InvalidParams, "missing operator");
    if (!(p.radius > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "radius must be positive");
    if (!(p.delta > 0.0)) throw Error(ErrorCode::InvalidDelta, "delta must be positive");
    check_probability(p.q);
    require_dim(p.b, p.a_op->dim(), "tr_solve b");
    if (!p.b.allFinite()) throw Error(ErrorCode::NonFinite, "tr_solve b");

    const std::uint64_t before = p.a_op->matvec_count();
    TRSolution sol = detail::tr_attempt(p, rng, 1.0);
    if (!(sol.residual <= p.delta)) {
        sol = detail::tr_attempt(p, rng, 2.0);
        sol.retried = true;
    }
    sol.matvecs_used = p.a_op->matvec_count() - before;
    if (!(sol.residual <= p.delta))
        throw Error(ErrorCode::CertificateFailure,
                    "residual " + std::to_string(sol.residual) + " > delta " +
                        std::to_string(p.delta));
    return sol;
}

// Bound on matvecs per call: 4 (sqrt(B D/delta) log(d B D/(q^2 delta)) + sqrt(lg D/delta)).
inline double tr_matvec_bound(Index d, double b_bound, double radius, double delta, double q,
                              double lg) {
    const double bd = b_bound * radius / delta;
    return 4.0 * (std::sqrt(bd) * std::log(static_cast<double>(d) * bd / (q * q)) +
                  std::sqrt(lg * radius / delta));
}

} // namespace oqn
