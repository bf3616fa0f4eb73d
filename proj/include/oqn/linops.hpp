#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "types.hpp"

namespace oqn {

struct MatvecCounter {
    std::uint64_t count = 0;
};

using CounterPtr = std::shared_ptr<MatvecCounter>;

inline CounterPtr make_counter() { return std::make_shared<MatvecCounter>(); }

// Dense symmetric matrix seen through matvecs. Every apply() bumps the
// shared run-scoped counter by one.
class SymOperator {
public:
    SymOperator() : SymOperator(Matrix::Zero(1, 1)) {}

    explicit SymOperator(Matrix a, CounterPtr counter = make_counter())
        : a_(std::move(a)), counter_(std::move(counter)) {
        if (a_.rows() != a_.cols() || a_.rows() == 0)
            throw Error(ErrorCode::DimensionMismatch, "operator must be square and nonempty");
        if (!a_.allFinite()) throw Error(ErrorCode::NonFinite, "operator entries");
        const double tol = 1e-12 * (1.0 + a_.norm());
        if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > tol)
            throw Error(ErrorCode::InvalidParams, "operator is not symmetric");
        a_ = 0.5 * (a_ + a_.transpose()).eval();
    }

    static SymOperator zeros(Index d, CounterPtr counter = make_counter()) {
        return SymOperator(Matrix::Zero(d, d), std::move(counter));
    }
    static SymOperator identity(Index d, CounterPtr counter = make_counter()) {
        return SymOperator(Matrix::Identity(d, d), std::move(counter));
    }

    Index dim() const { return a_.rows(); }

    Vector apply(const Vector& v) const {
        require_dim(v, dim(), "matvec");
        ++counter_->count;
        return a_ * v;
    }

    double frobenius_norm() const { return a_.norm(); }
    const Matrix& dense() const { return a_; }

    std::uint64_t matvec_count() const { return counter_->count; }
    const CounterPtr& counter() const { return counter_; }

private:
    Matrix a_;
    CounterPtr counter_;
};

// base - shift*I. The shift is free; one base matvec per apply.
template <class Op>
class ShiftedOperator {
public:
    ShiftedOperator(const Op& base, double shift) : base_(base), shift_(shift) {}

    Index dim() const { return base_.dim(); }
    Vector apply(const Vector& v) const { return base_.apply(v) - shift_ * v; }
    double frobenius_norm() const { return dense().norm(); }
    Matrix dense() const {
        return base_.dense() - shift_ * Matrix::Identity(dim(), dim());
    }
    std::uint64_t matvec_count() const { return base_.matvec_count(); }
    double shift() const { return shift_; }

private:
    const Op& base_;
    double shift_;
};

// scale*base + diag*I, e.g. A = B/2 + I/eta.
template <class Op>
class AffineOperator {
public:
    AffineOperator(const Op& base, double scale, double diag)
        : base_(base), scale_(scale), diag_(diag) {}

    Index dim() const { return base_.dim(); }
    Vector apply(const Vector& v) const { return scale_ * base_.apply(v) + diag_ * v; }
    double frobenius_norm() const { return dense().norm(); }
    Matrix dense() const {
        return scale_ * base_.dense() + diag_ * Matrix::Identity(dim(), dim());
    }
    std::uint64_t matvec_count() const { return base_.matvec_count(); }

private:
    const Op& base_;
    double scale_;
    double diag_;
};

template <class Op>
Vector matvec(const Op& op, const Vector& v) {
    return op.apply(v);
}

template <class Op>
double frobenius_norm(const Op& op) {
    return op.frobenius_norm();
}

struct ExtremeEig {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    Vector v_min;
    Vector v_max;
};

inline constexpr Index kDenseEigCap = 200;

// Brute-force oracle; not used on the algorithm's hot path.
template <class Op>
ExtremeEig dense_extreme_eig(const Op& op, Index cap = kDenseEigCap) {
    if (op.dim() > cap)
        throw Error(ErrorCode::DimTooLargeForDenseOracle,
                    "dim " + std::to_string(op.dim()) + " > cap " + std::to_string(cap));
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.dense());
    const Index d = op.dim();
    return {es.eigenvalues()[0], es.eigenvalues()[d - 1], es.eigenvectors().col(0),
            es.eigenvectors().col(d - 1)};
}

inline double op_norm(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Lower triangle, row-major, for debug dumps.
inline std::vector<double> lower_triangle(const SymOperator& op) {
    std::vector<double> out;
    const Index d = op.dim();
    out.reserve(static_cast<std::size_t>(d * (d + 1) / 2));
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j <= i; ++j) out.push_back(op.dense()(i, j));
    return out;
}

} // namespace oqn
