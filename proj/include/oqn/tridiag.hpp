#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "types.hpp"

namespace oqn {

struct TridiagEigen {
    Vector values;   // ascending
    Matrix vectors;  // column j pairs with values[j]
};

// Symmetric tridiagonal eigensolver: implicit QL with Wilkinson-type shifts.
// alphas: diagonal (N); betas: off-diagonal (N-1 used; extra entries ignored).
inline TridiagEigen tridiag_eig(const std::vector<double>& alphas,
                                const std::vector<double>& betas) {
    const int n = static_cast<int>(alphas.size());
    TridiagEigen out;
    if (n == 0) return out;

    std::vector<double> d(alphas);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = betas.at(static_cast<std::size_t>(i));
    Matrix z = Matrix::Identity(n, n);

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (++iter > 200) break;

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            int i = m - 1;
            bool deflated = false;
            for (; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for (int k = 0; k < n; ++k) {
                    f = z(k, i + 1);
                    z(k, i + 1) = s * z(k, i) + c * f;
                    z(k, i) = c * z(k, i) - s * f;
                }
            }
            if (deflated) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        out.vectors.col(j) = z.col(order[j]).normalized();
    }
    return out;
}

inline Matrix tridiag_dense(const std::vector<double>& alphas, const std::vector<double>& betas) {
    const Index n = static_cast<Index>(alphas.size());
    Matrix t = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) t(i, i) = alphas[i];
    for (Index i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = betas[i];
    return t;
}

} // namespace oqn
