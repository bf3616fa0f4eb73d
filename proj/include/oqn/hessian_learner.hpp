#pragma once

#include <cmath>

#include "eig.hpp"
#include "linops.hpp"
#include "rng.hpp"

namespace oqn {

struct QuadLoss {
    Vector y;
    Vector s;
};

// ||y - B s||^2. One matvec.
template <class Op>
double loss(const Op& b, const QuadLoss& q) {
    require_dim(q.y, b.dim(), "loss y");
    require_dim(q.s, b.dim(), "loss s");
    return (q.y - b.apply(q.s)).squaredNorm();
}

inline Matrix loss_gradient_from_residual(const Vector& r, const Vector& s) {
    return -(r * s.transpose() + s * r.transpose());
}

// -(r s' + s r') with r = y - B s. One matvec.
template <class Op>
Matrix loss_gradient(const Op& b, const QuadLoss& q) {
    require_dim(q.y, b.dim(), "loss_gradient y");
    require_dim(q.s, b.dim(), "loss_gradient s");
    return loss_gradient_from_residual(q.y - b.apply(q.s), q.s);
}

inline double default_rho(double d_radius) {
    if (!(d_radius > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "rho needs D > 0");
    return 1.0 / (16.0 * d_radius * d_radius);
}

inline double frob_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

// G~ = G, or G + max{0, -<G, B>} S after a separation.
inline Matrix surrogate_gradient(const Matrix& g, const Matrix& b, const SepResult& sep_res) {
    if (sep_res.which == SepCase::InsideDoubled) return g;
    return g + std::max(0.0, -frob_inner(g, b)) * sep_res.s_mat;
}

struct LearnerState {
    SymOperator w_mat;  // W_n
    SymOperator b_mat;  // B_n, the action being played
    SepResult sep_n;    // SEP(W_n) that produced B_n
    double rho = 0.0;
    double l1 = 0.0;
    Index dim = 0;
    double q_per_call = 0.01;
};

struct LearnerAudit {
    double gamma = 0.0;          // gamma_n
    SepCase which = SepCase::InsideDoubled;
    double loss_b = 0.0;         // l_n(B_n)
    double g_tilde_norm = 0.0;   // ||G~_n||_F
    double w_next_norm = 0.0;    // ||W_{n+1}||_F
    double gamma_next = 0.0;
    std::uint64_t sep_matvecs = 0;
    std::size_t sep_steps = 0;
    std::uint64_t loss_matvecs = 0;
    // Filled when a comparator H is supplied.
    bool has_comparator = false;
    double loss_h = 0.0;               // l_n(H)
    double lin_played = 0.0;           // <G_n, B_n - H>
    double lin_surrogate = 0.0;        // <G~_n, W_n - H>
};

namespace detail {

inline void play(LearnerState& st, RngStream& rng, const CounterPtr& counter) {
    st.sep_n = sep(st.w_mat, st.l1, st.q_per_call, rng);
    if (st.sep_n.which == SepCase::InsideDoubled)
        st.b_mat = SymOperator(st.w_mat.dense(), counter);
    else
        st.b_mat = SymOperator(st.w_mat.dense() / st.sep_n.gamma, counter);
}

}  // namespace detail

// W_1 = 0 and B_1 from SEP(W_1), which is 0.
inline LearnerState learner_init(Index d, double l1, double rho, double q, RngStream& rng,
                                 CounterPtr counter = make_counter()) {
    if (!(l1 > 0.0)) throw Error(ErrorCode::InvalidParams, "l1 must be positive");
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidParams, "rho must be positive");
    check_probability(q);
    LearnerState st{SymOperator::zeros(d, counter), SymOperator::zeros(d, counter), {}, rho, l1, d,
                    q};
    detail::play(st, rng, counter);
    return st;
}

// Consumes l_n, moves W_n to W_{n+1}, and plays B_{n+1} = SEP-scaled W_{n+1}.
inline LearnerAudit learner_step(LearnerState& st, const QuadLoss& q, RngStream& rng,
                                 const Matrix* comparator = nullptr) {
    require_dim(q.y, st.dim, "learner y");
    require_dim(q.s, st.dim, "learner s");
    const CounterPtr counter = st.b_mat.counter();
    LearnerAudit au;
    au.gamma = st.sep_n.gamma;
    au.which = st.sep_n.which;

    const auto mv0 = counter->count;
    const Vector r = q.y - st.b_mat.apply(q.s);
    au.loss_matvecs = counter->count - mv0;
    au.loss_b = r.squaredNorm();
    const Matrix g = loss_gradient_from_residual(r, q.s);
    const Matrix gt = surrogate_gradient(g, st.b_mat.dense(), st.sep_n);
    au.g_tilde_norm = gt.norm();

    if (comparator != nullptr) {
        const Matrix& h = *comparator;
        au.has_comparator = true;
        au.loss_h = (q.y - h * q.s).squaredNorm();
        au.lin_played = frob_inner(g, st.b_mat.dense() - h);
        au.lin_surrogate = frob_inner(gt, st.w_mat.dense() - h);
    }

    Matrix w_next = st.w_mat.dense() - st.rho * gt;
    const double cap = std::sqrt(static_cast<double>(st.dim)) * st.l1;
    const double nw = w_next.norm();
    if (nw > cap) w_next *= cap / nw;
    st.w_mat = SymOperator(0.5 * (w_next + w_next.transpose()), counter);
    au.w_next_norm = st.w_mat.frobenius_norm();

    detail::play(st, rng, counter);
    au.gamma_next = st.sep_n.gamma;
    au.sep_matvecs = st.sep_n.matvecs_used;
    au.sep_steps = st.sep_n.steps;
    return au;
}

} // namespace oqn
