#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "errors.hpp"

namespace oqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline void require_dim(const Vector& v, Index d, const char* what) {
    if (v.size() != d)
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": expected length " + std::to_string(d) +
                        ", got " + std::to_string(v.size()));
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Scales x to norm `radius`, shrinking by ulps until the computed norm is <= radius.
inline Vector scale_to_radius(const Vector& x, double radius) {
    const double nx = x.norm();
    double f = radius / nx;
    Vector y = x * f;
    while (y.norm() > radius) {
        f = std::nextafter(f, 0.0);
        y = x * f;
    }
    return y;
}

// Radial projection onto the centered Euclidean ball.
inline Vector project_ball(const Vector& x, double radius) {
    const double nx = x.norm();
    if (nx <= radius) return x;
    return scale_to_radius(x, radius);
}

} // namespace oqn
