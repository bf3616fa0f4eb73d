#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "hessian_learner.hpp"
#include "linops.hpp"
#include "problems.hpp"
#include "rng.hpp"
#include "trsolver.hpp"

namespace oqn {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct HyperParams {
    double d_radius = 0.0;
    double eta = 0.0;
    std::int64_t t_len = 1;
    std::int64_t k_eps = 1;
    std::int64_t m_total = 1;
    double delta_tr = 0.0;
    double p_fail = 0.01;
    double gap_used = kNaN;
    bool auto_computed = false;
};

inline void validate(const HyperParams& p) {
    if (!(p.d_radius > 0.0)) throw Error(ErrorCode::InvalidParams, "D must be positive");
    if (!(p.eta > 0.0)) throw Error(ErrorCode::InvalidParams, "eta must be positive");
    if (!(p.delta_tr > 0.0)) throw Error(ErrorCode::InvalidParams, "delta must be positive");
    if (p.t_len < 1 || p.k_eps < 1) throw Error(ErrorCode::InvalidParams, "T and K must be >= 1");
    if (p.m_total != p.t_len * p.k_eps) throw Error(ErrorCode::InvalidParams, "M must equal K*T");
    if (!(p.p_fail > 0.0 && p.p_fail < 1.0))
        throw Error(ErrorCode::InvalidProbability, "p_fail out of (0,1)");
}

inline HyperParams manual_params(double d_radius, double eta, std::int64_t t_len,
                                 std::int64_t k_eps, double delta_tr, double p_fail = 0.01) {
    HyperParams p{d_radius, eta, t_len, k_eps, t_len * k_eps, delta_tr, p_fail, kNaN, false};
    validate(p);
    return p;
}

inline double initial_gap(const ObjectiveSpec& spec, std::optional<double> gap_bound) {
    if (gap_bound) {
        if (!(*gap_bound > 0.0)) throw Error(ErrorCode::NoGapEstimate, "gap bound must be positive");
        return *gap_bound;
    }
    if (!spec.value) throw Error(ErrorCode::NoGapEstimate, "no value oracle and no gap bound");
    const double gap = (*spec.value)(spec.x0) - spec.f_lower;
    if (!(gap > 0.0)) throw Error(ErrorCode::NoGapEstimate, "f(x0) - f_lower is not positive");
    return gap;
}

inline HyperParams compute_hyperparams_from(double gap, Index dim, double l1, double l2,
                                            std::int64_t m_budget, double p_fail) {
    if (m_budget < 1) throw Error(ErrorCode::InvalidParams, "budget must be >= 1");
    if (!(l2 > 0.0)) throw Error(ErrorCode::ZeroL2, "hyperparameter formulas divide by L2");
    const double d = static_cast<double>(dim);
    const double m = static_cast<double>(m_budget);
    HyperParams p;
    p.d_radius = std::pow(gap / (52.0 * std::pow(d, 0.4) * std::pow(l1, 0.4) * std::pow(l2, 0.6) * m),
                          5.0 / 13.0);
    p.eta = std::pow(1.0 / (24.0 * d * l1 * std::pow(l2, 2.0 / 3.0) *
                            std::pow(p.d_radius, 2.0 / 3.0)),
                     0.6);
    const double t_raw = 3.0 / std::cbrt(p.d_radius * l2 * p.eta);
    p.t_len = std::max<std::int64_t>(1, std::llround(t_raw));
    p.k_eps = std::max<std::int64_t>(1, m_budget / p.t_len);
    p.m_total = p.k_eps * p.t_len;
    p.delta_tr = p.d_radius / (p.eta * static_cast<double>(p.t_len));
    p.p_fail = p_fail;
    p.gap_used = gap;
    p.auto_computed = true;
    validate(p);
    return p;
}

inline HyperParams compute_hyperparams(const ObjectiveSpec& spec, std::int64_t m_budget,
                                       double p_fail = 0.01,
                                       std::optional<double> gap_bound = std::nullopt) {
    if (!(spec.l2 > 0.0)) throw Error(ErrorCode::ZeroL2, "use manual parameters when L2 = 0");
    return compute_hyperparams_from(initial_gap(spec, gap_bound), spec.dim, spec.l1, spec.l2,
                                    m_budget, p_fail);
}

// High-probability bound on the average episode gradient norm for the auto parameters.
inline double rate_bound(double gap, Index dim, double l1, double l2, std::int64_t m) {
    const double d = static_cast<double>(dim);
    const double mm = static_cast<double>(m);
    return 2.0 * std::pow(gap, 8.0 / 13.0) *
               std::pow(52.0 * std::pow(l1, 0.4) * std::pow(l2, 0.6), 5.0 / 13.0) *
               std::pow(d, 2.0 / 13.0) / std::pow(mm, 8.0 / 13.0) +
           l2 * gap / (416.0 * d * l1 * mm) +
           7.0 * std::pow(l1, 17.0 / 13.0) * std::pow(gap, 3.0 / 13.0) / std::pow(l2, 7.0 / 13.0) *
               std::pow(d, 4.0 / 13.0) / std::pow(mm, 16.0 / 13.0) +
           std::pow(l2, 7.0 / 13.0) / 48.0 *
               std::pow(gap / (52.0 * std::pow(d, 0.4) * std::pow(l1, 0.4) * mm), 10.0 / 13.0);
}

enum class Method { Oqn, OgBaseline };
enum class AuditLevel { Off, Episode, Full };

struct RunOptions {
    Method method = Method::Oqn;
    AuditLevel audit = AuditLevel::Episode;
    std::optional<double> eps_target;
};

class StationaryStartError : public Error {
public:
    explicit StationaryStartError(Vector g)
        : Error(ErrorCode::StationaryStart, "gradient at x0 vanishes"), grad(std::move(g)) {}
    Vector grad;
};

struct StepLog {
    std::int64_t n = 0;
    double g_dot_delta = 0.0;
    double delta_norm = 0.0;
    double hint_err_sq = 0.0;      // ||g_n - h_n||^2
    double f_prev = kNaN;          // f(x_{n-1})
    double f_cur = kNaN;           // f(x_n)
    // Learner update consumed at this step, i.e. for index n-1.
    bool learner_updated = false;
    double loss_b = kNaN;          // l_{n-1}(B_{n-1})
    double gamma = kNaN;
    double loss_h = kNaN;          // l_{n-1}(H_{n-1})
    double lin_played = kNaN;
    double lin_surrogate = kNaN;
    double w_norm = kNaN;
    std::uint64_t sep_matvecs = 0;
    std::size_t sep_bound = 0;
    double hess_path = kNaN;       // ||H_n - H_{n-1}||_F
    double hess_h1_sq = kNaN;      // ||W_1 - H_1||_F^2 at n = 1
    // Trust-region solve producing Delta_{n+1}.
    bool tr_called = false;
    TrBranch branch = TrBranch::Convex;
    double lambda_hat = kNaN;
    double tr_residual = kNaN;
    std::uint64_t tr_matvecs = 0;
    double tr_bound = kNaN;
    double tr_lg = kNaN;
    std::size_t lanczos_steps = 0;
    std::size_t grad_iters = 0;
    bool tr_retried = false;
    double fixed_point_err = kNaN;
    bool outside_box = false;
};

struct EpisodeRecord {
    std::int64_t k = 0;
    Vector w_bar;
    double grad_norm_at_wbar = 0.0;
    Vector u_k;
    double episode_regret = 0.0;
    double sum_loss = 0.0;
    double mean_g_norm = 0.0;  // ||(1/T) sum g_n||
    std::uint64_t cum_gradients = 0;
    std::uint64_t cum_matvecs = 0;
};

struct Margin {
    bool available = false;
    double lhs = kNaN;
    double rhs = kNaN;
    double margin = kNaN;  // rhs - lhs (worst case for per-step checks)
    bool ok = true;
};

struct AuditSummary {
    Margin counting;                // gradients == 2M + K + 1
    Margin descent;                 // per-step descent margin, constant 1/48
    Margin descent_midpoint;        // same with the constant 1/24 from the midpoint rule
    Margin episode_gradient;        // per-episode averaged-gradient bound
    Margin shifting_regret;         // shifting regret vs sum ||g_n - h_n||^2
    Margin shifting_regret_losses;  // same with only the learner losses l_1..l_{M-1}
    Margin average_gradient;
    Margin dynamic_regret;
    Margin comparator_loss;
    Margin comparator_path;
    Margin surrogate;               // <G, B - H> <= <G~, W - H>
    Margin tr_matvecs;              // max per-call ratio to the bound
    Margin sep_matvecs;
    Margin hint_identity;           // ||g_{n+1} - h_{n+1}||^2 == l_n(B_n)
    Margin fixed_point;             // ||Delta - Pi(Delta - eta(A Delta + b))|| <= eta delta
    Margin delta_norm;              // ||Delta_n|| <= D
    bool all_ok = true;
};

struct TrStats {
    std::uint64_t calls = 0;
    std::uint64_t matvecs_total = 0;
    std::uint64_t matvecs_max = 0;
    std::uint64_t retries = 0;
    std::uint64_t convex = 0;
    std::uint64_t reg_interior = 0;
    std::uint64_t reg_boundary = 0;
    double max_residual_ratio = 0.0;
    double max_bound_ratio = 0.0;
};

struct RunReport {
    HyperParams params;
    Method method = Method::Oqn;
    std::vector<EpisodeRecord> episodes;
    Vector w_hat;
    std::int64_t best_k = 0;
    double grad_norm_final = kNaN;
    std::int64_t steps_done = 0;
    std::uint64_t gradients = 0;
    std::uint64_t matvecs = 0;
    TrStats tr;
    std::uint64_t sep_calls = 0;
    std::uint64_t sep_matvecs_max = 0;
    std::vector<StepLog> steps;
    AuditSummary audits;
    bool stationary_start = false;
    std::uint64_t box_violations = 0;
    double f_x0 = kNaN;
    double gap = kNaN;
    double bound = kNaN;
    double l1 = 0.0, l2 = 0.0;
    Index dim = 0;
    std::uint64_t seed = 0;
    std::uint64_t rng_draws = 0;
};

struct OqnState {
    Vector x;            // x_{n-1} at the start of step n
    Vector delta_vec;    // Delta_n
    Vector hint;         // h_n
    Vector delta_prev;   // Delta_{n-1}
    Vector grad_z_prev;  // grad f(z_{n-1})
    std::optional<LearnerState> learner;
    Vector sum_w, sum_g;
    double sum_gdelta = 0.0;
    double sum_loss = 0.0;
    std::int64_t n = 0;
    std::int64_t episodes_closed = 0;
    OracleCounter grads;
    CounterPtr matvecs = make_counter();
    std::optional<Matrix> hess_prev;  // H_{n-1}
    double f_prev = kNaN;
    Method method = Method::Oqn;
};

struct StepOutput {
    StepLog log;
    std::optional<EpisodeRecord> episode;
};

inline double tr_b_bound(double l1, double eta) { return std::max(2.0 * l1, l1 + 1.0 / eta); }
inline double per_call_q(const HyperParams& p) {
    return p.p_fail / (2.0 * static_cast<double>(p.m_total));
}

inline OqnState init(const ObjectiveSpec& spec, const HyperParams& params, RngStream& rng,
                     Method method = Method::Oqn) {
    validate(spec);
    validate(params);
    OqnState st;
    st.method = method;
    const Vector g0 = eval_gradient(spec, spec.x0, st.grads);
    if (g0.norm() <= 1e-14 * spec.l1) throw StationaryStartError(g0);
    const Index d = spec.dim;
    st.x = spec.x0;
    st.delta_vec = -params.d_radius * g0 / g0.norm();
    st.hint = g0;
    st.delta_prev = Vector::Zero(d);
    st.grad_z_prev = Vector::Zero(d);
    st.sum_w = Vector::Zero(d);
    st.sum_g = Vector::Zero(d);
    if (method == Method::Oqn)
        st.learner = learner_init(d, spec.l1, default_rho(params.d_radius), per_call_q(params), rng,
                                  st.matvecs);
    if (spec.value) st.f_prev = (*spec.value)(st.x);
    return st;
}

inline StepOutput step(OqnState& st, const ObjectiveSpec& spec, const HyperParams& params,
                       RngStream& rng, AuditLevel audit = AuditLevel::Episode) {
    if (st.n >= params.m_total) throw Error(ErrorCode::InvalidParams, "step past the budget");
    const std::int64_t n = ++st.n;
    const Index d = spec.dim;
    const double radius = params.d_radius;
    const double eta = params.eta;
    const bool full = audit == AuditLevel::Full;
    const bool track_hess = full && spec.hess.has_value() && st.method == Method::Oqn;

    StepOutput out;
    StepLog& lg = out.log;
    lg.n = n;

    const Vector delta = st.delta_vec;
    const Vector x_prev = st.x;
    const Vector x = x_prev + delta;
    const Vector w = x_prev + 0.5 * delta;
    const Vector g = eval_gradient(spec, w, st.grads);

    if (n >= 2 && st.learner) {
        const QuadLoss ql{g - st.grad_z_prev, 0.5 * (delta - st.delta_prev)};
        const Matrix* comp = (track_hess && st.hess_prev) ? &*st.hess_prev : nullptr;
        const LearnerAudit au = learner_step(*st.learner, ql, rng, comp);
        lg.learner_updated = true;
        lg.loss_b = au.loss_b;
        lg.gamma = au.gamma;
        lg.w_norm = au.w_next_norm;
        lg.sep_matvecs = au.sep_matvecs;
        lg.sep_bound = sep_steps(d, st.learner->q_per_call);
        if (au.has_comparator) {
            lg.loss_h = au.loss_h;
            lg.lin_played = au.lin_played;
            lg.lin_surrogate = au.lin_surrogate;
        }
        st.sum_loss += au.loss_b;
    }

    const Vector z = x + 0.5 * delta;
    const Vector gz = eval_gradient(spec, z, st.grads);
    if (track_hess) {
        Matrix h = (*spec.hess)(z);
        if (st.hess_prev) lg.hess_path = (h - *st.hess_prev).norm();
        else lg.hess_h1_sq = h.squaredNorm();
        st.hess_prev = std::move(h);
    }
    lg.hint_err_sq = (g - st.hint).squaredNorm();
    lg.g_dot_delta = g.dot(delta);
    lg.delta_norm = delta.norm();

    Vector delta_next;
    Vector hint_next;
    if (st.method == Method::Oqn) {
        const SymOperator& bm = st.learner->b_mat;
        const Vector b_delta = bm.apply(delta);
        const Vector bvec = gz + g - st.hint - 0.5 * b_delta - delta / eta;
        const AffineOperator<SymOperator> a_op(bm, 0.5, 1.0 / eta);
        TrustRegionSubproblem<AffineOperator<SymOperator>> p;
        p.a_op = &a_op;
        p.b = bvec;
        p.radius = radius;
        p.delta = params.delta_tr;
        p.q = per_call_q(params);
        p.b_bound = tr_b_bound(spec.l1, eta);
        p.lmax_bound = spec.l1 + 1.0 / eta;
        const TRSolution sol = tr_solve(p, rng);
        delta_next = sol.delta_vec;
        hint_next = gz + 0.5 * (bm.apply(delta_next) - b_delta);

        lg.tr_called = true;
        lg.branch = sol.branch;
        lg.lambda_hat = sol.lambda_hat;
        lg.tr_residual = sol.residual;
        lg.tr_matvecs = sol.matvecs_used;
        lg.tr_lg = sol.lg;
        lg.tr_bound = tr_matvec_bound(d, p.b_bound, radius, p.delta, p.q, sol.lg);
        lg.lanczos_steps = sol.lanczos_steps;
        lg.grad_iters = sol.grad_iters;
        lg.tr_retried = sol.retried;
        if (full) {
            const Vector r = a_op.dense() * delta_next + bvec;
            lg.fixed_point_err = (delta_next - project_ball(delta_next - eta * r, radius)).norm();
        }
    } else {
        delta_next = project_ball(delta - eta * (gz + g - st.hint), radius);
        hint_next = gz;
    }

    if (spec.value) {
        lg.f_prev = st.f_prev;
        lg.f_cur = (*spec.value)(x);
        st.f_prev = lg.f_cur;
    }
    lg.outside_box = !inside_box(spec, w) || !inside_box(spec, z) || !inside_box(spec, x);

    st.sum_w += w;
    st.sum_g += g;
    st.sum_gdelta += g.dot(delta);
    if (n % params.t_len == 0) {
        EpisodeRecord ep;
        ep.k = ++st.episodes_closed;
        const double tt = static_cast<double>(params.t_len);
        ep.w_bar = st.sum_w / tt;
        ep.grad_norm_at_wbar = eval_gradient(spec, ep.w_bar, st.grads).norm();
        const double sg = st.sum_g.norm();
        ep.u_k = sg > 0.0 ? Vector(-radius * st.sum_g / sg) : Vector::Zero(d);
        ep.episode_regret = st.sum_gdelta - st.sum_g.dot(ep.u_k);
        ep.sum_loss = st.sum_loss;
        ep.mean_g_norm = sg / tt;
        ep.cum_gradients = st.grads.gradients;
        ep.cum_matvecs = st.matvecs->count;
        out.episode = std::move(ep);
        st.sum_w.setZero();
        st.sum_g.setZero();
        st.sum_gdelta = 0.0;
        st.sum_loss = 0.0;
    }

    st.x = x;
    st.delta_prev = delta;
    st.delta_vec = std::move(delta_next);
    st.hint = std::move(hint_next);
    st.grad_z_prev = gz;
    return out;
}

namespace detail {

inline Margin le_margin(double lhs, double rhs, double tol) {
    Margin m;
    m.available = true;
    m.lhs = lhs;
    m.rhs = rhs;
    m.margin = rhs - lhs;
    m.ok = m.margin >= -tol;
    return m;
}

// Per-item check, keeping the worst margin.
struct WorstMargin {
    Margin m;
    void add(double lhs, double rhs, double tol) {
        const double mg = rhs - lhs;
        if (!m.available || mg < m.margin) {
            m.lhs = lhs;
            m.rhs = rhs;
            m.margin = mg;
        }
        m.available = true;
        if (mg < -tol) m.ok = false;
    }
};

}  // namespace detail

// Recomputes every audited inequality from the run log.
inline AuditSummary audit_regret(const RunReport& r, bool require_values = false) {
    using detail::le_margin;
    AuditSummary a;
    const HyperParams& p = r.params;
    const double dd = p.d_radius;
    const double dim = static_cast<double>(r.dim);
    const double kk = static_cast<double>(r.episodes.size());
    const double tt = static_cast<double>(p.t_len);
    const double m_steps = static_cast<double>(r.steps_done);

    {
        const double expect = r.stationary_start ? 1.0 : 2.0 * m_steps + kk + 1.0;
        a.counting = le_margin(static_cast<double>(r.gradients), expect, 0.0);
        a.counting.ok = static_cast<double>(r.gradients) == expect;
    }
    if (r.stationary_start || r.steps.empty()) {
        a.all_ok = a.counting.ok;
        return a;
    }
    const bool have_values = std::isfinite(r.steps.front().f_cur);
    if (require_values && !have_values)
        throw Error(ErrorCode::MissingValueOracle, "value oracle needed for descent audits");

    detail::WorstMargin dsc, dsc24, cmpl, cmpp, sur, trm, sepm, hint, fp, dn, epg;
    double sum_hint = 0.0, sum_loss = 0.0, sum_loss_h = 0.0, path = 0.0, h1 = kNaN;
    bool have_h = false;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        const StepLog& s = r.steps[i];
        sum_hint += s.hint_err_sq;
        dn.add(s.delta_norm, dd, 1e-12 * dd);
        if (have_values) {
            const double lhs = -(s.f_prev - s.f_cur + s.g_dot_delta);
            const double tol = 1e-9 * (1.0 + std::abs(s.f_cur));
            dsc.add(lhs, r.l2 * dd * dd * dd / 48.0, tol);
            dsc24.add(lhs, r.l2 * dd * dd * dd / 24.0, tol);
        }
        if (s.learner_updated) {
            sum_loss += s.loss_b;
            hint.add(std::abs(s.hint_err_sq - s.loss_b), 0.0,
                     1e-9 * (1.0 + s.hint_err_sq + s.loss_b));
            sepm.add(static_cast<double>(s.sep_matvecs), static_cast<double>(s.sep_bound), 0.0);
            if (std::isfinite(s.loss_h)) {
                have_h = true;
                sum_loss_h += s.loss_h;
                cmpl.add(s.loss_h, r.l2 * r.l2 * std::pow(dd, 4) / 4.0, 1e-9);
                sur.add(s.lin_played, s.lin_surrogate, 1e-8);
            }
        }
        if (std::isfinite(s.hess_h1_sq)) h1 = s.hess_h1_sq;
        if (std::isfinite(s.hess_path)) {
            cmpp.add(s.hess_path, 2.0 * r.l2 * std::sqrt(dim) * dd, 1e-9);
            // H_1..H_{M-1} enter the dynamic regret; H_M does not.
            if (s.n <= r.steps_done - 1) path += s.hess_path;
        }
        if (s.tr_called) {
            trm.add(static_cast<double>(s.tr_matvecs), s.tr_bound, 0.0);
            if (std::isfinite(s.fixed_point_err))
                fp.add(s.fixed_point_err, p.eta * p.delta_tr, 1e-12);
        }
    }
    a.descent = dsc.m;
    a.descent_midpoint = dsc24.m;
    a.comparator_loss = cmpl.m;
    a.comparator_path = cmpp.m;
    a.surrogate = sur.m;
    a.tr_matvecs = trm.m;
    a.sep_matvecs = sepm.m;
    a.hint_identity = hint.m;
    a.fixed_point = fp.m;
    a.delta_norm = dn.m;

    double reg = 0.0, mean_grad = 0.0;
    for (const auto& e : r.episodes) {
        reg += e.episode_regret;
        mean_grad += e.grad_norm_at_wbar;
        epg.add(e.grad_norm_at_wbar, e.mean_g_norm + 0.5 * r.l2 * tt * tt * dd * dd, 1e-9);
    }
    a.episode_gradient = epg.m;

    if (!r.episodes.empty()) {
        const double base = 4.0 * kk * dd * dd / p.eta + 2.0 * dd * kk * tt * p.delta_tr;
        const double rhs = base + 1.5 * p.eta * sum_hint;
        a.shifting_regret = le_margin(reg, rhs, 1e-6 * std::abs(rhs));
        const double rhs_l = base + 1.5 * p.eta * sum_loss;
        a.shifting_regret_losses = le_margin(reg, rhs_l, 1e-6 * std::abs(rhs_l));
        a.shifting_regret_losses.ok = true;  // informational

        if (std::isfinite(r.gap)) {
            mean_grad /= kk;
            const double dkt = dd * kk * tt;
            const double rhs_avg = r.gap / dkt + reg / dkt + r.l2 * dd * dd / 48.0 +
                                 0.5 * r.l2 * tt * tt * dd * dd;
            a.average_gradient = le_margin(mean_grad, rhs_avg, 1e-6 * std::abs(rhs_avg));
        }
    }
    if (have_h && std::isfinite(h1) && r.method == Method::Oqn) {
        const double rhs = 16.0 * dd * dd * h1 + 2.0 * sum_loss_h +
                           64.0 * r.l1 * dd * dd * std::sqrt(dim) * path;
        a.dynamic_regret = le_margin(sum_loss, rhs, 1e-6 * std::abs(rhs));
    }

    a.descent_midpoint.ok = true;  // informational
    a.all_ok = true;
    for (const Margin* m : {&a.counting, &a.descent, &a.episode_gradient, &a.shifting_regret, &a.average_gradient, &a.dynamic_regret,
                            &a.comparator_loss, &a.comparator_path, &a.surrogate, &a.tr_matvecs,
                            &a.sep_matvecs, &a.hint_identity, &a.fixed_point, &a.delta_norm})
        if (m->available && !m->ok) a.all_ok = false;
    return a;
}

inline RunReport run(const ObjectiveSpec& spec, const HyperParams& params, RngStream& rng,
                     const RunOptions& opt = {}) {
    validate(spec);
    validate(params);
    RunReport rep;
    rep.params = params;
    rep.method = opt.method;
    rep.l1 = spec.l1;
    rep.l2 = spec.l2;
    rep.dim = spec.dim;
    rep.seed = rng.seed();
    if (spec.value) {
        rep.f_x0 = (*spec.value)(spec.x0);
        rep.gap = rep.f_x0 - spec.f_lower;
    }
    if (std::isfinite(params.gap_used)) rep.gap = params.gap_used;
    if (spec.l2 > 0.0 && std::isfinite(rep.gap) && rep.gap > 0.0)
        rep.bound = rate_bound(rep.gap, spec.dim, spec.l1, spec.l2, params.m_total);

    OqnState st;
    try {
        st = init(spec, params, rng, opt.method);
    } catch (const StationaryStartError& e) {
        EpisodeRecord ep;
        ep.k = 1;
        ep.w_bar = spec.x0;
        ep.grad_norm_at_wbar = e.grad.norm();
        ep.u_k = Vector::Zero(spec.dim);
        ep.cum_gradients = 1;
        rep.episodes.push_back(ep);
        rep.w_hat = spec.x0;
        rep.best_k = 1;
        rep.grad_norm_final = ep.grad_norm_at_wbar;
        rep.gradients = 1;
        rep.stationary_start = true;
        rep.audits = audit_regret(rep);
        return rep;
    }

    const bool keep = opt.audit != AuditLevel::Off;
    for (std::int64_t n = 1; n <= params.m_total; ++n) {
        StepOutput so = step(st, spec, params, rng, opt.audit);
        const StepLog& s = so.log;
        if (s.outside_box) ++rep.box_violations;
        if (s.tr_called) {
            auto& t = rep.tr;
            ++t.calls;
            t.matvecs_total += s.tr_matvecs;
            t.matvecs_max = std::max(t.matvecs_max, s.tr_matvecs);
            if (s.tr_retried) ++t.retries;
            if (s.branch == TrBranch::Convex) ++t.convex;
            else if (s.branch == TrBranch::RegularizedInterior) ++t.reg_interior;
            else ++t.reg_boundary;
            t.max_residual_ratio = std::max(t.max_residual_ratio, s.tr_residual / params.delta_tr);
            t.max_bound_ratio =
                std::max(t.max_bound_ratio, static_cast<double>(s.tr_matvecs) / s.tr_bound);
        }
        if (s.learner_updated) {
            ++rep.sep_calls;
            rep.sep_matvecs_max = std::max<std::uint64_t>(rep.sep_matvecs_max, s.sep_matvecs);
        }
        if (keep) rep.steps.push_back(s);
        if (so.episode) {
            const bool stop =
                opt.eps_target && so.episode->grad_norm_at_wbar <= *opt.eps_target;
            rep.episodes.push_back(std::move(*so.episode));
            if (stop) break;
        }
    }
    rep.steps_done = st.n;
    if (st.learner) ++rep.sep_calls;  // the initial play on W_1

    std::size_t best = 0;
    for (std::size_t k = 1; k < rep.episodes.size(); ++k)
        if (rep.episodes[k].grad_norm_at_wbar < rep.episodes[best].grad_norm_at_wbar) best = k;
    if (!rep.episodes.empty()) {
        rep.w_hat = rep.episodes[best].w_bar;
        rep.best_k = rep.episodes[best].k;
        rep.grad_norm_final = rep.episodes[best].grad_norm_at_wbar;
    } else {
        rep.w_hat = st.x;
    }
    rep.gradients = st.grads.gradients;
    rep.matvecs = st.matvecs->count;
    rep.rng_draws = rng.draws();
    if (keep) {
        rep.audits = audit_regret(rep);
    } else {
        rep.audits.counting = detail::le_margin(
            static_cast<double>(rep.gradients),
            2.0 * static_cast<double>(rep.steps_done) + static_cast<double>(rep.episodes.size()) + 1.0,
            0.0);
        rep.audits.counting.ok = rep.audits.counting.margin == 0.0;
        rep.audits.all_ok = rep.audits.counting.ok;
    }
    return rep;
}

} // namespace oqn
