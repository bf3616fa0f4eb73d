#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "linops.hpp"
#include "rng.hpp"
#include "tridiag.hpp"

namespace oqn {

struct LanczosFactorization {
    std::vector<double> alphas;  // alpha_1..alpha_N
    std::vector<double> betas;   // beta_2..beta_{N+1}
    std::vector<Vector> basis;   // v_1..v_N, plus v_{N+1} when beta_{N+1} > 0
    std::optional<std::size_t> breakdown_at;

    std::size_t steps() const { return alphas.size(); }
    bool broken() const { return breakdown_at.has_value(); }

    // N x k matrix [v_1 .. v_k].
    Matrix basis_matrix(std::size_t k) const {
        Matrix v(basis.front().size(), static_cast<Index>(k));
        for (std::size_t j = 0; j < k; ++j) v.col(static_cast<Index>(j)) = basis[j];
        return v;
    }
};

// Lanczos with full reorthogonalization that can be extended in place.
template <class Op>
class LanczosProcess {
public:
    LanczosProcess(const Op& op, const Vector& v1) : op_(op) {
        require_dim(v1, op.dim(), "lanczos start");
        if (std::abs(v1.norm() - 1.0) > 1e-12)
            throw Error(ErrorCode::NonUnitStart, "start vector norm " + std::to_string(v1.norm()));
        tol_ = 1e-12 * op.frobenius_norm();
        f_.basis.push_back(v1);
    }

    // Run until `n_total` steps exist, breakdown, or the dimension is exhausted.
    void extend(std::size_t n_total) {
        n_total = std::min<std::size_t>(n_total, static_cast<std::size_t>(op_.dim()));
        while (f_.steps() < n_total && !f_.broken()) step();
    }

    const LanczosFactorization& factorization() const { return f_; }
    std::uint64_t matvecs() const { return matvecs_; }

private:
    void step() {
        const std::size_t k = f_.steps();  // 0-based index of v_{k+1}
        const Vector& vk = f_.basis[k];
        Vector w = op_.apply(vk);
        ++matvecs_;
        if (k > 0) w -= f_.betas[k - 1] * f_.basis[k - 1];
        const double alpha = w.dot(vk);
        w -= alpha * vk;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j <= k; ++j) w -= w.dot(f_.basis[j]) * f_.basis[j];
        f_.alphas.push_back(alpha);
        const double beta = w.norm();
        // In R^d the Krylov space saturates after d steps.
        if (beta <= tol_ || f_.steps() == static_cast<std::size_t>(op_.dim())) {
            f_.betas.push_back(0.0);
            f_.breakdown_at = f_.steps();
            return;
        }
        f_.betas.push_back(beta);
        f_.basis.push_back(w / beta);
    }

    const Op& op_;
    LanczosFactorization f_;
    double tol_ = 0.0;
    std::uint64_t matvecs_ = 0;
};

template <class Op>
LanczosFactorization lanczos_factorize(const Op& op, const Vector& v1, std::size_t n_steps) {
    LanczosProcess<Op> lp(op, v1);
    lp.extend(n_steps);
    return lp.factorization();
}

inline TridiagEigen tridiag_eig(const LanczosFactorization& f) {
    return tridiag_eig(f.alphas, f.betas);
}

enum class MinEvecCase { PSD_certified, NegativeEig };

struct MinEvecResult {
    double lambda_hat = 0.0;
    Vector v_hat;
    MinEvecCase which = MinEvecCase::PSD_certified;
    std::uint64_t matvecs_used = 0;
    std::size_t steps = 0;       // Lanczos steps taken
    double residual = 0.0;       // certified ||A v - lambda v|| in the negative case
    std::uint64_t draw_index = 0;
};

inline void check_probability(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw Error(ErrorCode::InvalidProbability, "q = " + std::to_string(q));
}

inline std::size_t ceil_count(double x) {
    if (!(x > 1.0)) return 1;
    return static_cast<std::size_t>(std::ceil(x));
}

// Stage-1 and stage-2 iteration counts, before capping at d.
inline std::size_t min_evec_n1(Index d, double delta, double q, double b_bound) {
    if (b_bound <= 0.0) return 1;
    return ceil_count(0.25 * std::sqrt(2.0 * b_bound / delta) *
                          std::log(11.0 * static_cast<double>(d) / (q * q)) + 0.5);
}

inline std::size_t min_evec_n2(Index d, double delta, double q, double b_bound) {
    if (b_bound <= 0.0) return 1;
    return ceil_count(0.25 * std::sqrt(2.0 * b_bound / delta) *
                          std::log(44.0 * static_cast<double>(d) * b_bound / (q * q * delta)) +
                      0.5);
}

inline std::size_t sep_steps(Index d, double q) {
    const auto n = ceil_count(0.5 * std::log(11.0 * static_cast<double>(d) / (q * q)) + 0.5);
    return std::min<std::size_t>(n, static_cast<std::size_t>(d));
}

inline std::size_t scaled_cap(std::size_t n, double scale, Index d) {
    const auto s = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * scale));
    return std::min<std::size_t>(std::max<std::size_t>(s, 1), static_cast<std::size_t>(d));
}

// Randomized minimum-eigenvector oracle. Either certifies lambda_min >= lambda_hat >= 0
// or returns lambda_hat < 0 with ||A v - lambda_hat v|| <= delta (checked by caller).
template <class Op>
MinEvecResult min_evec(const Op& a, double delta, double q, double b_bound, RngStream& rng,
                       double budget_scale = 1.0) {
    check_probability(q);
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw Error(ErrorCode::InvalidDelta, "delta = " + std::to_string(delta));
    const Index d = a.dim();

    MinEvecResult res;
    res.draw_index = rng.draws();
    LanczosProcess<Op> lp(a, rng.unit_sphere(d));
    lp.extend(scaled_cap(min_evec_n1(d, delta, q, b_bound), budget_scale, d));
    {
        const auto te = tridiag_eig(lp.factorization());
        res.lambda_hat = te.values[0] - 0.5 * delta;
    }
    if (res.lambda_hat >= 0.0) {
        res.which = MinEvecCase::PSD_certified;
        res.v_hat = Vector::Zero(d);
        res.matvecs_used = lp.matvecs();
        res.steps = lp.factorization().steps();
        return res;
    }

    lp.extend(scaled_cap(min_evec_n2(d, delta, q, b_bound), budget_scale, d));
    const auto& f = lp.factorization();
    const Index n = static_cast<Index>(f.steps());

    // ||[T - lambda I; beta_{N+1} e_N^T] z|| = ||(A - lambda I) V z|| for unit z.
    // Smallest right singular vector = minimizer of the pentadiagonal form.
    Matrix c = Matrix::Zero(n + 1, n);
    c.topRows(n) = tridiag_dense(f.alphas, f.betas);
    c.topRows(n).diagonal().array() -= res.lambda_hat;
    c(n, n - 1) = f.broken() ? 0.0 : f.betas[static_cast<std::size_t>(n - 1)];
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    const Vector z = svd.matrixV().col(n - 1);
    res.residual = svd.singularValues()[n - 1];

    res.v_hat = f.basis_matrix(static_cast<std::size_t>(n)) * z;
    res.v_hat.normalize();
    res.which = MinEvecCase::NegativeEig;
    res.matvecs_used = lp.matvecs();
    res.steps = f.steps();
    return res;
}

enum class SepCase { InsideDoubled, Separated };

struct SepResult {
    double gamma = 0.0;
    Matrix s_mat;        // zero in the inside case
    Vector direction;    // unit Ritz vector behind s_mat (empty when inside)
    double sign = 0.0;   // s_mat = sign * direction direction^T / l1
    SepCase which = SepCase::InsideDoubled;
    std::uint64_t matvecs_used = 0;
    std::size_t steps = 0;
    double ritz_max = 0.0;
    double ritz_min = 0.0;
    std::uint64_t draw_index = 0;
};

// Approximate separation oracle for the operator-norm ball of radius l1.
template <class Op>
SepResult sep(const Op& w, double l1, double q, RngStream& rng) {
    check_probability(q);
    if (!(l1 > 0.0)) throw Error(ErrorCode::InvalidParams, "l1 must be positive");
    const Index d = w.dim();

    SepResult res;
    res.draw_index = rng.draws();
    LanczosProcess<Op> lp(w, rng.unit_sphere(d));
    lp.extend(sep_steps(d, q));
    const auto& f = lp.factorization();
    const auto te = tridiag_eig(f);
    const Index n = static_cast<Index>(f.steps());
    res.matvecs_used = lp.matvecs();
    res.steps = f.steps();
    res.ritz_min = te.values[0];
    res.ritz_max = te.values[n - 1];
    res.gamma = std::max(res.ritz_max, -res.ritz_min) / l1;
    res.s_mat = Matrix::Zero(d, d);

    if (res.gamma <= 1.0) {
        res.which = SepCase::InsideDoubled;
        return res;
    }
    const Matrix v = f.basis_matrix(static_cast<std::size_t>(n));
    if (res.ritz_max >= -res.ritz_min) {
        res.direction = (v * te.vectors.col(n - 1)).normalized();
        res.sign = 1.0;
    } else {
        res.direction = (v * te.vectors.col(0)).normalized();
        res.sign = -1.0;
    }
    res.s_mat = (res.sign / l1) * res.direction * res.direction.transpose();
    res.which = SepCase::Separated;
    return res;
}

} // namespace oqn
