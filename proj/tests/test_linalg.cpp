#include <gtest/gtest.h>

#include <cmath>

#include "mixprod/hadamard.hpp"
#include "mixprod/linalg.hpp"
#include "mixprod/rng.hpp"

using namespace mixprod;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = rng.uniform(lo, hi);
    return A;
}

}  // namespace

TEST(Svd, IdentitySingularValuesAllOne) {
    SvdResult r = svd(Matrix::Identity(2, 2));
    EXPECT_DOUBLE_EQ(r.sigma[0], 1.0);
    EXPECT_DOUBLE_EQ(r.sigma[1], 1.0);
}

TEST(Svd, DiagonalSingularValuesSorted) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 2.0;
    A(1, 1) = 3.0;
    SvdResult r = svd(A);
    EXPECT_DOUBLE_EQ(r.sigma[0], 3.0);
    EXPECT_DOUBLE_EQ(r.sigma[1], 2.0);
}

TEST(Svd, RankOneAllOnes) {
    SvdResult r = svd(Matrix::Ones(2, 2));
    EXPECT_NEAR(r.sigma[0], 2.0, 1e-14);
    EXPECT_NEAR(r.sigma[1], 0.0, 1e-15);
}

TEST(Svd, ContractHoldsOnRandomMatrices) {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 2 + static_cast<int>(rng.below(15));
        int n = 2 + static_cast<int>(rng.below(15));
        Matrix A = random_matrix(m, n, rng);
        SvdResult r = svd(A);
        double norm = r.sigma[0];
        EXPECT_LE(r.backward_error, 1e-10 * std::max(norm, 1e-300));
        EXPECT_LE((r.U.transpose() * r.U - Matrix::Identity(m, m)).norm(), 1e-10);
        EXPECT_LE((r.V.transpose() * r.V - Matrix::Identity(n, n)).norm(), 1e-10);
        for (int i = 1; i < r.sigma.size(); ++i) EXPECT_GE(r.sigma[i - 1], r.sigma[i]);
        // The reported bound really bounds the reconstruction gap.
        Matrix R = A;
        for (int i = 0; i < r.sigma.size(); ++i)
            R -= r.sigma[i] * r.U.col(i) * r.V.col(i).transpose();
        EXPECT_LE(singular_values(R)[0], r.backward_error + 1e-15);
    }
}

TEST(SigmaK, FullColumnRankTallMatrix) {
    Matrix A(3, 2);
    A << 1, 0, 0, 1, 1, 1;
    EXPECT_GT(sigma_k(A, 2), 0.99);
}

TEST(SigmaK, GoldenRatioExtension) {
    // Extension of the single row (0, 1): rows (1, 1) and (0, 1).
    Matrix row(1, 2);
    row << 0.0, 1.0;
    HadamardExtension H = hadamard_extension(row);
    double expected = std::sqrt((3.0 - std::sqrt(5.0)) / 2.0);
    EXPECT_NEAR(sigma_k(H.data, 2), expected, 1e-14);
}

TEST(SigmaK, OutOfRangeThrows) {
    EXPECT_THROW(sigma_k(Matrix::Identity(2, 2), 3), PreconditionFailed);
    EXPECT_THROW(sigma_k(Matrix::Identity(2, 2), 0), PreconditionFailed);
}

TEST(EigReal, DiagonalSortedDescending) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 0.1;
    A(1, 1) = 0.9;
    EigResult r = eig_real(A);
    EXPECT_DOUBLE_EQ(r.eigenvalues[0], 0.9);
    EXPECT_DOUBLE_EQ(r.eigenvalues[1], 0.1);
    EXPECT_NEAR(std::abs(r.eigenvectors(1, 0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(r.eigenvectors(0, 1)), 1.0, 1e-14);
}

TEST(EigReal, RotationHasComplexSpectrum) {
    Matrix A(2, 2);
    A << 0, -1, 1, 0;
    EXPECT_THROW(eig_real(A), ComplexSpectrum);
}

TEST(EigReal, RecoversPlantedSpectrum) {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        // Diagonalizable by construction: A = P D P^-1 with well-spread D.
        int k = 2 + static_cast<int>(rng.below(4));
        Matrix P = random_matrix(k, k, rng) + 3.0 * Matrix::Identity(k, k);
        Vector d(k);
        for (int j = 0; j < k; ++j) d[j] = 0.05 + 0.9 * (k - j - 1) / std::max(1, k - 1) +
                                           0.02 * rng.uniform01();
        Matrix A = P * d.asDiagonal() * P.inverse();
        EigResult r = eig_real(A);
        Vector sorted = d;
        std::sort(sorted.data(), sorted.data() + k, std::greater<double>());
        for (int j = 0; j < k; ++j) EXPECT_NEAR(r.eigenvalues[j], sorted[j], 1e-9);
        EXPECT_LE(r.max_defect, 1e-8 * operator_norm_estimate(A));
        for (int j = 0; j < k; ++j) EXPECT_NEAR(r.eigenvectors.col(j).norm(), 1.0, 1e-12);
    }
}

TEST(Solve, IdentityAndDiagonal) {
    Vector b(2);
    b << 3.0, -4.0;
    Vector x = solve(Matrix::Identity(2, 2), b);
    EXPECT_NEAR((x - b).norm(), 0.0, 1e-14);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = 4.0;
    Vector y = solve(D, b);
    EXPECT_NEAR(y[0], 1.5, 1e-14);
    EXPECT_NEAR(y[1], -1.0, 1e-14);
}

TEST(Solve, PlantedSolutionRecovered) {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        int k = 2 + static_cast<int>(rng.below(5));
        Matrix A = random_matrix(k, k, rng) + 2.5 * Matrix::Identity(k, k);
        Vector x = random_matrix(k, 1, rng).col(0);
        Vector b = A * x;
        Vector got = solve(A, b);
        EXPECT_LE((got - x).norm(), 1e-10 * x.norm());
        EXPECT_LE((A * got - b).norm(), 1e-10 * (operator_norm_estimate(A) * got.norm() + b.norm()));
    }
}

TEST(Solve, SingularSystemRefused) {
    Matrix A = Matrix::Ones(2, 2);
    Vector b(2);
    b << 1.0, 1.0;
    try {
        solve(A, b);
        FAIL() << "expected NearSingular";
    } catch (const NearSingular& e) {
        EXPECT_LT(e.ratio, 1e-13);
    }
}

TEST(Properties, WeylPerturbationBound) {
    Rng rng(4242);
    for (int size : {2, 4, 8, 16}) {
        for (int trial = 0; trial < 40; ++trial) {
            Matrix A = random_matrix(size, size, rng);
            Matrix E = random_matrix(size, size, rng, -1e-3, 1e-3);
            Vector sa = singular_values(A);
            Vector sae = singular_values(A + E);
            double en = singular_values(E)[0];
            for (int i = 0; i < size; ++i)
                EXPECT_LE(std::abs(sae[i] - sa[i]), en + 1e-10);
        }
    }
}

TEST(Properties, EckartYoungTruncationResidual) {
    Rng rng(777);
    for (int size : {3, 8, 16}) {
        for (int trial = 0; trial < 25; ++trial) {
            Matrix A = random_matrix(size, size, rng);
            SvdResult dec = svd(A);
            for (int r : {1, size / 2, size - 1}) {
                Matrix Ar = Matrix::Zero(size, size);
                for (int i = 0; i < r; ++i)
                    Ar += dec.sigma[i] * dec.U.col(i) * dec.V.col(i).transpose();
                double resid = singular_values(A - Ar)[0];
                EXPECT_NEAR(resid, dec.sigma[r], 1e-10);
            }
        }
    }
}
