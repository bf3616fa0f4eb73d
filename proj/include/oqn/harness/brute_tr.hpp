#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>

#include "../types.hpp"

namespace oqn {

struct BruteTrResult {
    Vector x;
    double value = 0.0;
    double multiplier = 0.0;  // mu >= 0 with (A + mu I) x = -b
    bool hard_case = false;
};

// Global minimizer of x'Ax/2 + b'x over ||x|| <= D from a dense eigendecomposition
// and bisection on the secular equation.
inline BruteTrResult brute_tr(const Matrix& a, const Vector& b, double radius) {
    const Index d = a.rows();
    if (d > 20) throw Error(ErrorCode::DimTooLarge, "brute_tr supports dim <= 20");
    if (!(radius > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "radius must be positive");
    require_dim(b, d, "brute_tr b");

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    const Vector lam = es.eigenvalues();
    const Matrix& q = es.eigenvectors();
    const Vector bt = q.transpose() * b;
    const double lmin = lam[0];
    const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
    const double eig_tol = 1e-12 * scale;
    const double comp_tol = 1e-13 * (1.0 + b.norm());

    auto x_of = [&](double mu, bool skip_min) {
        Vector c(d);
        for (Index i = 0; i < d; ++i) {
            const double den = lam[i] + mu;
            if (skip_min && lam[i] - lmin <= eig_tol) c[i] = 0.0;
            else c[i] = -bt[i] / den;
        }
        return c;
    };
    auto finish = [&](const Vector& coords, double mu, bool hard) {
        BruteTrResult r;
        r.x = q * coords;
        r.value = 0.5 * r.x.dot(a * r.x) + b.dot(r.x);
        r.multiplier = mu;
        r.hard_case = hard;
        return r;
    };

    bool min_space_empty = true;
    for (Index i = 0; i < d; ++i)
        if (lam[i] - lmin <= eig_tol && std::abs(bt[i]) > comp_tol) min_space_empty = false;

    // Interior solution with mu = 0.
    if (lmin > eig_tol) {
        const Vector c = x_of(0.0, false);
        if (c.norm() <= radius) return finish(c, 0.0, false);
    } else if (lmin >= -eig_tol && min_space_empty) {
        const Vector c = x_of(0.0, true);
        if (c.norm() <= radius) {
            Vector cc = c;
            // Pad along the null space if it lowers nothing; value is unchanged.
            return finish(cc, 0.0, false);
        }
    }

    const double lo0 = std::max(0.0, -lmin);
    if (min_space_empty) {
        const Vector c = x_of(lo0, true);
        if (c.norm() <= radius) {
            Vector cc = c;
            const double extra = std::sqrt(std::max(0.0, radius * radius - c.squaredNorm()));
            cc[0] += extra;
            return finish(cc, lo0, true);
        }
    }

    double lo = lo0;
    double hi = lo0 + b.norm() / radius + 1.0;
    while (x_of(hi, false).norm() > radius) hi = lo0 + 2.0 * (hi - lo0);
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (x_of(mid, false).norm() > radius) lo = mid;
        else hi = mid;
    }
    Vector c = x_of(hi, false);
    c *= radius / c.norm();
    return finish(c, hi, false);
}

} // namespace oqn
