#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "types.hpp"

namespace oqn {

using GradientFn = std::function<Vector(const Vector&)>;
using ValueFn = std::function<double(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

struct ObjectiveSpec {
    std::string name;
    Index dim = 0;
    GradientFn grad;
    std::optional<ValueFn> value;
    std::optional<HessianFn> hess;
    double l1 = 1.0;
    double l2 = 0.0;
    double f_lower = 0.0;
    Vector x0;
    std::optional<double> box_radius;  // local constants hold on [-r, r]^d
    double domain_radius = 3.0;        // sampling range for property checks
};

inline void validate(const ObjectiveSpec& s) {
    if (s.dim < 1) throw Error(ErrorCode::InvalidDim, "dim must be >= 1");
    if (!(s.l1 > 0.0)) throw Error(ErrorCode::InvalidParams, "l1 must be positive");
    if (!(s.l2 >= 0.0)) throw Error(ErrorCode::InvalidParams, "l2 must be nonnegative");
    require_dim(s.x0, s.dim, "x0");
    if (!s.grad) throw Error(ErrorCode::InvalidParams, "missing gradient oracle");
}

// Run-scoped oracle tally; owned by the caller's run context.
struct OracleCounter {
    std::uint64_t gradients = 0;
};

inline Vector eval_gradient(const ObjectiveSpec& s, const Vector& x, OracleCounter& c) {
    require_dim(x, s.dim, "eval_gradient x");
    ++c.gradients;
    Vector g = s.grad(x);
    require_dim(g, s.dim, "gradient oracle output");
    if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient oracle returned NaN/Inf");
    return g;
}

inline double eval_value(const ObjectiveSpec& s, const Vector& x) {
    if (!s.value) throw Error(ErrorCode::MissingValueOracle, s.name);
    require_dim(x, s.dim, "eval_value x");
    return (*s.value)(x);
}

inline bool inside_box(const ObjectiveSpec& s, const Vector& x) {
    return !s.box_radius || x.cwiseAbs().maxCoeff() <= *s.box_radius;
}

struct CatalogOptions {
    double mu = 0.1;      // cosine_mixture
    double kappa = 0.1;   // coupled_trig
    double box = 2.0;     // rosenbrock_local
};

namespace catalog_detail {

inline ObjectiveSpec quadratic(Index d, std::uint64_t seed) {
    Matrix q;
    if (seed == 0) {
        q = Matrix::Identity(d, d);
    } else {
        std::mt19937_64 eng(seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        Matrix g(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) g(i, j) = n01(eng);
        q = g.transpose() * g / static_cast<double>(d);
        q = 0.5 * (q + q.transpose()).eval();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
    ObjectiveSpec s;
    s.name = "quadratic";
    s.dim = d;
    s.grad = [q](const Vector& x) -> Vector { return q * x; };
    s.value = [q](const Vector& x) { return 0.5 * x.dot(q * x); };
    s.hess = [q](const Vector&) -> Matrix { return q; };
    s.l1 = std::max(es.eigenvalues()[d - 1], 1e-300);
    s.l2 = 0.0;
    s.f_lower = 0.0;
    s.x0 = Vector::Ones(d);
    return s;
}

// sum(1 - cos x_i) + mu/2 |x|^2; |cos| and |sin| <= 1 give L1 = 1 + mu, L2 = 1.
inline ObjectiveSpec cosine_mixture(Index d, double mu) {
    ObjectiveSpec s;
    s.name = "cosine_mixture";
    s.dim = d;
    s.grad = [mu](const Vector& x) -> Vector { return x.array().sin().matrix() + mu * x; };
    s.value = [mu](const Vector& x) {
        return (1.0 - x.array().cos()).sum() + 0.5 * mu * x.squaredNorm();
    };
    s.hess = [mu](const Vector& x) -> Matrix {
        Vector diag = x.array().cos().matrix();
        diag.array() += mu;
        return diag.asDiagonal();
    };
    s.l1 = 1.0 + mu;
    s.l2 = 1.0;
    s.f_lower = 0.0;
    s.x0 = Vector::Constant(d, std::numbers::pi / 2.0);
    return s;
}

// sum(1 - cos x_i) + kappa sum_{i<j} sin x_i sin x_j.
// L1 from Gershgorin: 1 + 2 kappa (d-1).
// L2 from the third-derivative form: 1 + kappa (d + 3 sqrt(d) + 2).
// f >= -kappa d / 2.
inline ObjectiveSpec coupled_trig(Index d, double kappa) {
    ObjectiveSpec s;
    s.name = "coupled_trig";
    s.dim = d;
    s.grad = [kappa](const Vector& x) -> Vector {
        const Vector sn = x.array().sin();
        const Vector cs = x.array().cos();
        const double total = sn.sum();
        return (sn.array() + kappa * cs.array() * (total - sn.array())).matrix();
    };
    s.value = [kappa](const Vector& x) {
        const Vector sn = x.array().sin();
        const double total = sn.sum();
        return (1.0 - x.array().cos()).sum() + 0.5 * kappa * (total * total - sn.squaredNorm());
    };
    s.hess = [kappa](const Vector& x) -> Matrix {
        const Vector sn = x.array().sin();
        const Vector cs = x.array().cos();
        const double total = sn.sum();
        Matrix h = kappa * cs * cs.transpose();
        for (Index i = 0; i < x.size(); ++i)
            h(i, i) = cs[i] - kappa * sn[i] * (total - sn[i]);
        return h;
    };
    const double dd = static_cast<double>(d);
    s.l1 = 1.0 + 2.0 * kappa * (dd - 1.0);
    s.l2 = 1.0 + kappa * (dd + 3.0 * std::sqrt(dd) + 2.0);
    s.f_lower = -0.5 * kappa * dd;
    s.x0 = Vector::Constant(d, std::numbers::pi / 2.0);
    return s;
}

// Chained Rosenbrock. On the box [-r, r]^d:
// L1 = 1200 r^2 + 1200 r + 202 (Gershgorin), L2 = 2400 r + 1200.
inline ObjectiveSpec rosenbrock_local(Index d, double r) {
    if (d < 2) throw Error(ErrorCode::InvalidDim, "rosenbrock_local needs dim >= 2");
    ObjectiveSpec s;
    s.name = "rosenbrock_local";
    s.dim = d;
    s.grad = [](const Vector& x) -> Vector {
        const Index n = x.size();
        Vector g = Vector::Zero(n);
        for (Index i = 0; i + 1 < n; ++i) {
            const double t = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * t;
        }
        return g;
    };
    s.value = [](const Vector& x) {
        double f = 0.0;
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double t = x[i + 1] - x[i] * x[i];
            f += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
        }
        return f;
    };
    s.hess = [](const Vector& x) -> Matrix {
        const Index n = x.size();
        Matrix h = Matrix::Zero(n, n);
        for (Index i = 0; i + 1 < n; ++i) {
            h(i, i) += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
            h(i + 1, i + 1) += 200.0;
            h(i, i + 1) += -400.0 * x[i];
            h(i + 1, i) += -400.0 * x[i];
        }
        return h;
    };
    s.l1 = 1200.0 * r * r + 1200.0 * r + 202.0;
    s.l2 = 2400.0 * r + 1200.0;
    s.f_lower = 0.0;
    s.x0 = Vector(d);
    for (Index i = 0; i < d; ++i) s.x0[i] = (i % 2 == 0) ? -1.2 : 1.0;
    s.box_radius = r;
    s.domain_radius = r;
    return s;
}

}  // namespace catalog_detail

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{"quadratic", "cosine_mixture", "coupled_trig",
                                                "rosenbrock_local"};
    return names;
}

inline ObjectiveSpec catalog(const std::string& name, Index dim, std::uint64_t seed,
                             const CatalogOptions& opt = {}) {
    if (dim < 1) throw Error(ErrorCode::InvalidDim, "dim must be >= 1");
    if (name == "quadratic") return catalog_detail::quadratic(dim, seed);
    if (name == "cosine_mixture") return catalog_detail::cosine_mixture(dim, opt.mu);
    if (name == "coupled_trig") return catalog_detail::coupled_trig(dim, opt.kappa);
    if (name == "rosenbrock_local") return catalog_detail::rosenbrock_local(dim, opt.box);
    throw Error(ErrorCode::UnknownProblem, name);
}

inline constexpr double kFdGradStep = 1e-5;
inline constexpr double kFdHessStep = 1e-4;

// max_i |central difference of f - grad_i|
inline double fd_check_gradient(const ObjectiveSpec& s, const Vector& x, double h = kFdGradStep) {
    if (!s.value) throw Error(ErrorCode::MissingValueOracle, s.name);
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidStep, "finite-difference step must be positive");
    require_dim(x, s.dim, "fd_check_gradient x");
    const Vector g = s.grad(x);
    double err = 0.0;
    Vector xp = x, xm = x;
    for (Index i = 0; i < s.dim; ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const double fd = ((*s.value)(xp) - (*s.value)(xm)) / (2.0 * h);
        err = std::max(err, std::abs(fd - g[i]));
        xp[i] = xm[i] = x[i];
    }
    return err;
}

// max_ij |central difference of grad - hess_ij|
inline double fd_check_hessian(const ObjectiveSpec& s, const Vector& x, double h = kFdHessStep) {
    if (!s.hess) throw Error(ErrorCode::MissingValueOracle, s.name + " has no Hessian oracle");
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidStep, "finite-difference step must be positive");
    require_dim(x, s.dim, "fd_check_hessian x");
    const Matrix hx = (*s.hess)(x);
    double err = 0.0;
    Vector xp = x, xm = x;
    for (Index j = 0; j < s.dim; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Vector col = (s.grad(xp) - s.grad(xm)) / (2.0 * h);
        err = std::max(err, (col - hx.col(j)).cwiseAbs().maxCoeff());
        xp[j] = xm[j] = x[j];
    }
    return err;
}

} // namespace oqn
