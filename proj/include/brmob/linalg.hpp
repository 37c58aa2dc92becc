#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "brmob/error.hpp"

// Dense linear algebra for symmetric positive definite matrices. Everything
// weighted by a covariance goes through its Cholesky factor.

namespace brmob {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest feature dimension or arm count accepted anywhere in the library.
inline constexpr std::size_t kMaxDimension = 4096;

/// Relative tolerance on |M - M^T| accepted before symmetrizing.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Pivots at or below this fraction of the largest diagonal entry are rejected.
inline constexpr double kPivotTolerance = 1e-14;

inline void require_dims(bool ok, const std::string& what) {
    require(ok, ErrorKind::DimensionMismatch, what);
}

/// Symmetric matrix that is expected to be positive definite. The
/// constructor validates symmetry and stores (M + M^T) / 2; definiteness is
/// established when the matrix is factored.
class SpdMatrix {
public:
    SpdMatrix() = default;

    explicit SpdMatrix(const Matrix& m) {
        require_dims(m.rows() == m.cols() && m.rows() > 0, "SPD matrix must be square and non-empty");
        require_dims(static_cast<std::size_t>(m.rows()) <= kMaxDimension, "matrix dimension exceeds limit");
        const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        require(asym <= kSymmetryTolerance * scale, ErrorKind::NotSymmetric,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
        m_ = 0.5 * (m + m.transpose());
    }

    static SpdMatrix identity(std::size_t dim) {
        return SpdMatrix(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }

    static SpdMatrix diagonal(const Vector& diag) { return SpdMatrix(Matrix(diag.asDiagonal())); }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

/// Lower-triangular L with Sigma = L L^T.
class SpdFactor {
public:
    SpdFactor() = default;
    explicit SpdFactor(Matrix lower) : l_(std::move(lower)) {}

    std::size_t dim() const noexcept { return static_cast<std::size_t>(l_.rows()); }
    const Matrix& lower() const noexcept { return l_; }

    Matrix reconstruct() const { return l_ * l_.transpose(); }

    /// Solves Sigma x = b.
    Vector solve(const Vector& b) const {
        require_dims(b.size() == l_.rows(), "solve: dimension mismatch");
        Vector y = l_.triangularView<Eigen::Lower>().solve(b);
        return l_.transpose().triangularView<Eigen::Upper>().solve(y);
    }

    Matrix solve(const Matrix& b) const {
        require_dims(b.rows() == l_.rows(), "solve: dimension mismatch");
        Matrix y = l_.triangularView<Eigen::Lower>().solve(b);
        return l_.transpose().triangularView<Eigen::Upper>().solve(y);
    }

private:
    Matrix l_;
};

/// Cholesky-Banachiewicz with a relative pivot threshold.
inline SpdFactor cholesky(const SpdMatrix& m) {
    const Matrix& a = m.matrix();
    const Eigen::Index n = a.rows();
    const double max_diag = a.diagonal().maxCoeff();
    require(max_diag > 0.0, ErrorKind::NotPositiveDefinite, "non-positive diagonal");
    const double threshold = kPivotTolerance * max_diag;

    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > threshold)) {
            fail(ErrorKind::NotPositiveDefinite,
                 "pivot " + std::to_string(pivot) + " at index " + std::to_string(j));
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
        }
    }
    return SpdFactor(std::move(l));
}

/// sqrt(x^T Sigma x) = ||L^T x||.
inline double weighted_norm(const Vector& x, const SpdFactor& f) {
    require_dims(static_cast<std::size_t>(x.size()) == f.dim(), "weighted_norm: dimension mismatch");
    return (f.lower().transpose() * x).norm();
}

/// sqrt(x^T Sigma^{-1} x) = ||L^{-1} x||, via a forward substitution.
inline double inverse_weighted_norm(const Vector& x, const SpdFactor& f) {
    require_dims(static_cast<std::size_t>(x.size()) == f.dim(), "inverse_weighted_norm: dimension mismatch");
    return f.lower().triangularView<Eigen::Lower>().solve(x).norm();
}

inline SpdMatrix spd_inverse(const SpdMatrix& m) {
    const SpdFactor f = cholesky(m);
    const auto n = static_cast<Eigen::Index>(m.dim());
    Matrix inv = f.solve(Matrix(Matrix::Identity(n, n)));
    return SpdMatrix(0.5 * (inv + inv.transpose()));
}

inline double max_eigenvalue(const SpdMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

/// Symmetric square root Sigma^{1/2} from the eigendecomposition.
inline Matrix symmetric_sqrt(const SpdMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace brmob
