#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "brmob/linalg.hpp"

using namespace brmob;

namespace {

Matrix m2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix random_spd(std::mt19937_64& gen, int dim) {
    std::normal_distribution<double> n;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a(i, j) = n(gen);
    }
    return a * a.transpose() + 0.1 * Matrix::Identity(dim, dim);
}

}  // namespace

TEST(Cholesky, IdentityFactorsToIdentity) {
    const SpdFactor f = cholesky(SpdMatrix::identity(3));
    EXPECT_TRUE(f.lower().isApprox(Matrix::Identity(3, 3)));
}

TEST(Cholesky, HandComputedTwoByTwo) {
    const SpdFactor f = cholesky(SpdMatrix(m2(4, 2, 2, 3)));
    EXPECT_NEAR(f.lower()(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(f.lower()(1, 0), 1.0, 1e-15);
    EXPECT_NEAR(f.lower()(1, 1), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(f.lower()(0, 1), 0.0);
}

TEST(Cholesky, IndefiniteMatrixIsRejected) {
    try {
        (void)cholesky(SpdMatrix(m2(1, 2, 2, 1)));
        FAIL() << "expected NotPositiveDefinite";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    }
}

TEST(SpdMatrix, AsymmetryBeyondToleranceIsRejected) {
    try {
        (void)SpdMatrix(m2(1, 0.5, 0.4, 1));
        FAIL() << "expected NotSymmetric";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotSymmetric);
    }
}

TEST(SpdMatrix, TinyAsymmetryIsSymmetrized) {
    const SpdMatrix m(m2(2, 1 + 1e-14, 1, 2));
    EXPECT_EQ(m(0, 1), m(1, 0));
}

TEST(Cholesky, ReconstructsRandomMatrices) {
    std::mt19937_64 gen(7);
    for (int t = 0; t < 1000; ++t) {
        const int dim = 1 + t % 8;
        const Matrix a = random_spd(gen, dim);
        const SpdFactor f = cholesky(SpdMatrix(a));
        EXPECT_LE((f.reconstruct() - a).norm() / a.norm(), 1e-10);
        EXPECT_GT(f.lower().diagonal().minCoeff(), 0.0);
        EXPECT_TRUE(f.lower().isLowerTriangular());
    }
}

TEST(WeightedNorm, Examples) {
    const SpdFactor diag = cholesky(SpdMatrix::diagonal(v2(4, 9)));
    EXPECT_EQ(weighted_norm(Vector::Zero(2), diag), 0.0);
    EXPECT_NEAR(weighted_norm(v2(1, 0), diag), 2.0, 1e-15);
    const SpdFactor f = cholesky(SpdMatrix(m2(4, 2, 2, 3)));
    EXPECT_NEAR(weighted_norm(v2(1, 1), f), std::sqrt(11.0), 1e-14);
}

TEST(WeightedNorm, DimensionMismatch) {
    const SpdFactor f = cholesky(SpdMatrix::identity(3));
    try {
        (void)weighted_norm(v2(1, 1), f);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(InverseWeightedNorm, Examples) {
    EXPECT_EQ(inverse_weighted_norm(Vector::Zero(2), cholesky(SpdMatrix::identity(2))), 0.0);
    EXPECT_NEAR(inverse_weighted_norm(v2(2, 0), cholesky(SpdMatrix::diagonal(v2(4, 1)))), 1.0, 1e-15);
    // Sigma^{-1} = (1/8)[[3,-2],[-2,4]] gives x^T Sigma^{-1} x = (3 - 4 + 4) / 8 = 3/8.
    EXPECT_NEAR(inverse_weighted_norm(v2(1, 1), cholesky(SpdMatrix(m2(4, 2, 2, 3)))), std::sqrt(3.0 / 8.0), 1e-14);
}

TEST(WeightedNorm, PolarizationAndCauchySchwarz) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n;
    for (int t = 0; t < 200; ++t) {
        const int dim = 1 + t % 6;
        const Matrix a = random_spd(gen, dim);
        const SpdFactor f = cholesky(SpdMatrix(a));
        Vector x(dim), y(dim);
        for (int i = 0; i < dim; ++i) {
            x(i) = n(gen);
            y(i) = n(gen);
        }
        const double lhs = std::pow(weighted_norm(x, f), 2) + std::pow(weighted_norm(y, f), 2) - 2.0 * x.dot(a * y);
        EXPECT_NEAR(lhs, std::pow(weighted_norm(x - y, f), 2), 1e-10 * (1.0 + std::abs(lhs)));
        EXPECT_GE(inverse_weighted_norm(x, f) * weighted_norm(x, f), x.squaredNorm() * (1 - 1e-12));
    }
}

TEST(SpdInverse, Examples) {
    EXPECT_TRUE(spd_inverse(SpdMatrix::identity(3)).matrix().isApprox(Matrix::Identity(3, 3)));
    const SpdMatrix d = spd_inverse(SpdMatrix::diagonal(v2(2, 4)));
    EXPECT_NEAR(d(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(d(1, 1), 0.25, 1e-15);
    const SpdMatrix inv = spd_inverse(SpdMatrix(m2(4, 2, 2, 3)));
    const Matrix expected = m2(3, -2, -2, 4) / 8.0;
    EXPECT_LE((inv.matrix() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpdInverse, ProductAndInvolution) {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 200; ++t) {
        const int dim = 1 + t % 8;
        const Matrix a = random_spd(gen, dim);
        const SpdMatrix inv = spd_inverse(SpdMatrix(a));
        EXPECT_LE((a * inv.matrix() - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE((spd_inverse(inv).matrix() - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(MaxEigenvalue, Examples) {
    EXPECT_NEAR(max_eigenvalue(SpdMatrix::identity(5)), 1.0, 1e-14);
    Vector d(3);
    d << 1, 7, 3;
    EXPECT_NEAR(max_eigenvalue(SpdMatrix::diagonal(d)), 7.0, 1e-13);
    EXPECT_NEAR(max_eigenvalue(SpdMatrix(m2(4, 2, 2, 3))), (7.0 + std::sqrt(17.0)) / 2.0, 1e-12);
}

TEST(SymmetricSqrt, SquaresBack) {
    const Matrix a = m2(4, 2, 2, 3);
    const Matrix r = symmetric_sqrt(SpdMatrix(a));
    EXPECT_LE((r * r - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}
