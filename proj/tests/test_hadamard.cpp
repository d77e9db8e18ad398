#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mixprod/hadamard.hpp"
#include "mixprod/model.hpp"
#include "mixprod/rng.hpp"

using namespace mixprod;

namespace {

// Direct per-mask product, independent of the extension's recurrence.
double direct_entry(const Matrix& src, Mask s, int col) {
    double p = 1.0;
    for (int i = 0; i < src.rows(); ++i)
        if (s & (Mask{1} << i)) p *= src(i, col);
    return p;
}

Matrix random_source(int r, int k, Rng& rng) {
    Matrix m(r, k);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = rng.uniform01();
    return m;
}

// Separated rows for the singular-value bound checks.
Matrix separated_source(int k, double zeta, uint64_t seed) {
    MixtureModel mdl = random_model(k, k - 1, zeta, 1.0 / (2.0 * k), seed);
    return mdl.m;
}

}  // namespace

TEST(HadamardProduct, EntrywiseAndMismatch) {
    Vector a(3), b(3);
    a << 1.0, 2.0, 3.0;
    b << 4.0, 0.5, -1.0;
    Vector c = hadamard_product(a, b);
    EXPECT_DOUBLE_EQ(c[0], 4.0);
    EXPECT_DOUBLE_EQ(c[1], 1.0);
    EXPECT_DOUBLE_EQ(c[2], -3.0);
    Vector d(2);
    EXPECT_THROW(hadamard_product(a, d), PreconditionFailed);
}

TEST(Extension, TwoRowWorkedExample) {
    Matrix src(2, 2);
    src << 0.2, 0.8, 0.5, 0.5;
    HadamardExtension H = hadamard_extension(src);
    ASSERT_EQ(H.data.rows(), 4);
    ASSERT_EQ(H.data.cols(), 2);
    EXPECT_DOUBLE_EQ(H.data(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(H.data(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(H.data(1, 0), 0.2);
    EXPECT_DOUBLE_EQ(H.data(1, 1), 0.8);
    EXPECT_DOUBLE_EQ(H.data(2, 0), 0.5);
    EXPECT_DOUBLE_EQ(H.data(2, 1), 0.5);
    EXPECT_DOUBLE_EQ(H.data(3, 0), 0.1);
    EXPECT_DOUBLE_EQ(H.data(3, 1), 0.4);
}

TEST(Extension, AllOnesSource) {
    HadamardExtension H = hadamard_extension(Matrix::Ones(3, 2));
    EXPECT_TRUE(H.data.isApprox(Matrix::Ones(8, 2), 0.0));
}

TEST(Extension, MatchesDirectProducts) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        int r = 1 + static_cast<int>(rng.below(6));
        int k = 1 + static_cast<int>(rng.below(4));
        Matrix src = random_source(r, k, rng);
        HadamardExtension H = hadamard_extension(src);
        for (Mask s = 0; s < (Mask{1} << r); ++s)
            for (int j = 0; j < k; ++j)
                EXPECT_NEAR(H.data(s, j), direct_entry(src, s, j), 1e-14);
    }
}

TEST(Extension, MultiplicativityExactOnExactProducts) {
    // Entries whose products carry no rounding, so the identity is bitwise.
    const int r = 10;
    const double pool[] = {0.0, 0.5, 0.75, 1.0};
    Rng rng(31);
    Matrix src(r, 2);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < 2; ++j) src(i, j) = pool[rng.below(4)];
    HadamardExtension H = hadamard_extension(src);
    const Mask full = (Mask{1} << r) - 1;
    for (Mask a = 0; a <= full; ++a) {
        Mask comp = full & ~a;
        // Enumerate submasks of the complement, including empty.
        Mask b = comp;
        while (true) {
            for (int j = 0; j < 2; ++j)
                ASSERT_EQ(H.data(a | b, j), H.data(a, j) * H.data(b, j));
            if (b == 0) break;
            b = (b - 1) & comp;
        }
    }
}

TEST(Extension, MultiplicativityToleranceOnGenericEntries) {
    Rng rng(47);
    Matrix src = random_source(8, 3, rng);
    HadamardExtension H = hadamard_extension(src);
    const Mask full = (Mask{1} << 8) - 1;
    for (int trial = 0; trial < 500; ++trial) {
        Mask a = static_cast<Mask>(rng.below(full + 1));
        Mask b = static_cast<Mask>(rng.below(full + 1)) & ~a;
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR(H.data(a | b, j), H.data(a, j) * H.data(b, j), 1e-14);
    }
}

TEST(Extension, RowAccessorAndBounds) {
    Matrix src(2, 2);
    src << 0.3, 0.6, 0.9, 0.1;
    HadamardExtension H = hadamard_extension(src);
    EXPECT_DOUBLE_EQ(H.row(3)(0, 0), 0.3 * 0.9);
    EXPECT_DOUBLE_EQ(H.row(3)(0, 1), 0.6 * 0.1);
    EXPECT_DOUBLE_EQ(H.row(1)(0, 0), 0.3);
    EXPECT_THROW(H.row(4), PreconditionFailed);
    EXPECT_THROW(hadamard_extension(Matrix::Ones(25, 2)), PreconditionFailed);
}

TEST(Vandermonde, FrozenExamples) {
    Vector n1(2);
    n1 << 1.0, 2.0;
    Matrix V1 = vandermonde(n1, 2);
    Matrix E1(2, 2);
    E1 << 1, 1, 1, 2;
    EXPECT_TRUE(V1.isApprox(E1, 0.0));

    // Zero node must produce 0^0 = 1 in the top row.
    Vector n2(2);
    n2 << 0.0, 0.35;
    Matrix V2 = vandermonde(n2, 2);
    EXPECT_DOUBLE_EQ(V2(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(V2(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(V2(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(V2(1, 1), 0.35);

    Vector n3(3);
    n3 << 1.0, 2.0, 3.0;
    Matrix V3 = vandermonde(n3, 3);
    Matrix E3(3, 3);
    E3 << 1, 1, 1, 1, 2, 3, 1, 4, 9;
    EXPECT_TRUE(V3.isApprox(E3, 0.0));

    EXPECT_THROW(vandermonde(n3, 0), PreconditionFailed);
}

TEST(Annihilator, TwoComponentSymbolic) {
    Matrix m(1, 2);
    m << 0.37, 0.81;
    Vector h = rank_one_annihilator(m);
    ASSERT_EQ(h.size(), 2);
    EXPECT_DOUBLE_EQ(h[0], 0.37);
    EXPECT_DOUBLE_EQ(h[1], -1.0);
    HadamardExtension H = hadamard_extension(m);
    Vector prods = H.data.transpose() * h;
    EXPECT_DOUBLE_EQ(prods[0], 0.0);
    EXPECT_DOUBLE_EQ(prods[1], 0.37 - 0.81);
}

TEST(Annihilator, ThreeComponentWorkedExample) {
    Matrix m(2, 3);
    m << 0.1, 0.5, 0.9, 0.2, 0.6, 0.4;
    Vector h = rank_one_annihilator(m);
    HadamardExtension H = hadamard_extension(m);
    Vector prods = H.data.transpose() * h;
    EXPECT_NEAR(prods[0], 0.0, 1e-15);
    EXPECT_NEAR(prods[1], 0.0, 1e-15);
    double expect = (m(0, 0) - m(0, 2)) * (m(1, 1) - m(1, 2));
    EXPECT_NEAR(prods[2], expect, 1e-15);
    EXPECT_NEAR(prods[2], -0.16, 1e-12);
}

TEST(Annihilator, EqualColumnsGiveZeroEverywhere) {
    Matrix m(1, 2);
    m << 0.42, 0.42;
    Vector h = rank_one_annihilator(m);
    HadamardExtension H = hadamard_extension(m);
    Vector prods = H.data.transpose() * h;
    EXPECT_DOUBLE_EQ(prods[0], 0.0);
    EXPECT_DOUBLE_EQ(prods[1], 0.0);
    EXPECT_THROW(rank_one_annihilator(Matrix::Ones(2, 2)), PreconditionFailed);
}

TEST(Annihilator, IdentityHoldsOnRandomInstances) {
    Rng rng(2718);
    for (int k = 2; k <= 6; ++k) {
        for (int trial = 0; trial < 100; ++trial) {
            Matrix m(k - 1, k);
            for (int i = 0; i < k - 1; ++i) {
                for (int j = 0; j < k; ++j) m(i, j) = rng.uniform01();
                // Keep the witness product well away from zero so the
                // relative comparison is meaningful in floating point.
                while (std::abs(m(i, i) - m(i, k - 1)) < 0.3) {
                    m(i, i) = rng.uniform01();
                    m(i, k - 1) = rng.uniform01();
                }
            }
            Vector h = rank_one_annihilator(m);
            HadamardExtension H = hadamard_extension(m);
            double hn = h.norm();
            for (int j = 0; j < k - 1; ++j) {
                double v = std::abs(h.dot(H.data.col(j)));
                EXPECT_LE(v, 1e-12 * hn * std::pow(2.0, k / 2.0));
            }
            double got = h.dot(H.data.col(k - 1));
            double expect = 1.0;
            for (int i = 0; i < k - 1; ++i) expect *= m(i, i) - m(i, k - 1);
            EXPECT_NEAR(got, expect, 1e-12 * std::abs(expect));
        }
    }
}

TEST(SigmaBound, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(sigma_k_lower_bound(1, 0.3), 1.0);
    EXPECT_NEAR(sigma_k_lower_bound(2, 2.0 * std::sqrt(5.0)), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(sigma_k_lower_bound(2, 0.6), 0.6 / (2.0 * std::sqrt(10.0)), 1e-15);
    EXPECT_DOUBLE_EQ(sigma_k_cst_lower_bound(1, 0.3, 1.0), 1.0);
    EXPECT_NEAR(sigma_k_cst_lower_bound(2, 2.0 * std::sqrt(5.0), 0.5), 0.25, 1e-15);
    double s3 = sigma_k_lower_bound(3, 0.2);
    EXPECT_NEAR(sigma_k_cst_lower_bound(3, 0.2, 0.1), 0.1 * s3 * s3, 1e-18);
}

TEST(SigmaBound, HoldsOnSeparatedExtensions) {
    for (int k = 2; k <= 6; ++k) {
        for (double zeta : {0.05, 0.2}) {
            if ((k - 1) * zeta > 1.0) continue;
            double bound = sigma_k_lower_bound(k, zeta);
            for (int trial = 0; trial < 50; ++trial) {
                Matrix m = separated_source(k, zeta, 9000u + 100u * k + trial);
                double sk = sigma_k(hadamard_extension(m).data, k);
                EXPECT_GT(sk, bound) << "k=" << k << " zeta=" << zeta << " trial=" << trial;
            }
        }
    }
}

TEST(SigmaBound, SampledRankOneWitnesses) {
    Rng rng(5555);
    for (int k = 2; k <= 5; ++k) {
        const double zeta = 0.15;
        double bound = std::pow(zeta / (2.0 * std::sqrt(5.0)), k - 1);
        for (int inst = 0; inst < 4; ++inst) {
            Matrix m = separated_source(k, zeta, 31000u + 10u * k + inst);
            HadamardExtension H = hadamard_extension(m);
            for (int g = 0; g < 1000; ++g) {
                // Random rank-1 vector h[S] = prod_{i not in S} a_i * prod_{i in S} b_i.
                Vector h = Vector::Ones(Mask{1} << (k - 1));
                for (int i = 0; i < k - 1; ++i) {
                    double a = rng.uniform(-1.0, 1.0);
                    double b = rng.uniform(-1.0, 1.0);
                    for (Mask s = 0; s < (Mask{1} << (k - 1)); ++s)
                        h[s] *= (s & (Mask{1} << i)) ? b : a;
                }
                double hn = h.norm();
                if (hn < 1e-6) continue;
                EXPECT_GT((H.data.transpose() * h).norm() / hn, bound);
            }
        }
    }
}

TEST(KruskalRank, CanonicalCases) {
    EXPECT_EQ(kruskal_rank(Matrix::Identity(3, 3)), 3);
    Matrix dup(2, 3);
    dup << 1, 1, 0, 0, 0, 1;
    EXPECT_EQ(kruskal_rank(dup), 1);
    Matrix tri(2, 3);
    tri << 1, 0, 1, 0, 1, 1;
    EXPECT_EQ(kruskal_rank(tri), 2);
    EXPECT_THROW(kruskal_rank(Matrix::Ones(2, 13)), PreconditionFailed);
}
