#ifndef MIXPROD_HADAMARD_HPP
#define MIXPROD_HADAMARD_HPP

#include <cmath>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/linalg.hpp"

namespace mixprod {

inline Vector hadamard_product(const Vector& u, const Vector& v) {
    if (u.size() != v.size())
        throw PreconditionFailed("hadamard_product: length mismatch");
    return u.cwiseProduct(v);
}

// The subset-products matrix of r source rows over k columns: row S (a bitmask
// over source rows, ascending order) holds the entrywise product of the source
// rows named by S. Row 0 is all ones; singleton rows reproduce the source.
// Rank-k column spaces of these matrices are what make moment matrices of
// product mixtures factor.
struct HadamardExtension {
    int r = 0;
    int k = 0;
    Matrix data;  // 2^r x k

    Eigen::Block<const Matrix, 1, Eigen::Dynamic> row(Mask S) const {
        if (S >= (Mask{1} << r)) throw PreconditionFailed("HadamardExtension::row: mask out of range");
        return data.row(static_cast<long>(S));
    }
};

inline HadamardExtension hadamard_extension(const Matrix& rows) {
    const int r = static_cast<int>(rows.rows());
    const int k = static_cast<int>(rows.cols());
    if (r > 24) throw PreconditionFailed("hadamard_extension: r capped at 24 (2^r rows)");
    HadamardExtension H;
    H.r = r;
    H.k = k;
    H.data.resize(std::size_t{1} << r, k);
    H.data.row(0).setOnes();
    // row(S) = row(S minus lowest bit) * source(lowest bit), in mask order.
    for (Mask S = 1; S < (Mask{1} << r); ++S) {
        int low = std::countr_zero(S);
        H.data.row(S) = H.data.row(S ^ (Mask{1} << low)).cwiseProduct(rows.row(low));
    }
    return H;
}

// Vandermonde matrix of the nodes: entry (i, j) = nodes[j]^i for i in
// [0, r), with 0^0 = 1.
inline Matrix vandermonde(const Vector& nodes, int r) {
    if (r < 1) throw PreconditionFailed("vandermonde: r must be >= 1");
    Matrix V(r, nodes.size());
    V.row(0).setOnes();
    for (int i = 1; i < r; ++i) V.row(i) = V.row(i - 1).cwiseProduct(nodes.transpose());
    return V;
}

// Rank-one annihilator of the first k-1 columns of the extension of a
// (k-1) x k mean block: h with h_S = (-1)^|S| * prod_{i not in S} m_ii
// satisfies h^T H(m)_{*j} = prod_i (m_ii - m_ij), which vanishes for every
// j < k and certifies how far column k escapes the span.
inline Vector rank_one_annihilator(const Matrix& m) {
    const int rows = static_cast<int>(m.rows());
    const int k = static_cast<int>(m.cols());
    if (k != rows + 1)
        throw PreconditionFailed("rank_one_annihilator: expected a (k-1) x k block");
    if (rows > 24) throw PreconditionFailed("rank_one_annihilator: k capped at 25");
    Vector h(std::size_t{1} << rows);
    for (Mask S = 0; S < (Mask{1} << rows); ++S) {
        double prod = 1.0;
        for (int i = 0; i < rows; ++i)
            if (!(S & (Mask{1} << i))) prod *= m(i, i);
        h[S] = (popcount(S) % 2 == 0 ? prod : -prod);
    }
    return h;
}

// Worst-case floor for the k-th singular value of the extension of k-1
// zeta-separated rows: (1/sqrt(k)) * (zeta / (2*sqrt(5)))^(k-1).
inline double sigma_k_lower_bound(int k, double zeta) {
    if (k < 1) throw PreconditionFailed("sigma_k_lower_bound: k must be >= 1");
    if (!(zeta >= 0.0)) throw PreconditionFailed("sigma_k_lower_bound: zeta must be >= 0");
    return std::pow(zeta / (2.0 * std::sqrt(5.0)), k - 1) / std::sqrt(static_cast<double>(k));
}

// Matching floor for the k-th singular value of an exactly-assembled pair
// matrix over (k-1)-subsets: pi_min * bound^2.
inline double sigma_k_cst_lower_bound(int k, double zeta, double pi_min) {
    if (!(pi_min >= 0.0))
        throw PreconditionFailed("sigma_k_cst_lower_bound: pi_min must be >= 0");
    double s = sigma_k_lower_bound(k, zeta);
    return pi_min * s * s;
}

// Largest r such that every r-column submatrix has numerical rank r
// (sigma_r > 1e-9 * sigma_1 of the submatrix). Exhaustive; capped at 12
// columns.
inline int kruskal_rank(const Matrix& A) {
    const int cols = static_cast<int>(A.cols());
    if (cols > 12) throw PreconditionFailed("kruskal_rank: enumeration capped at 12 columns");
    const int maxr = std::min<int>(cols, static_cast<int>(A.rows()));
    int best = 0;
    for (int r = 1; r <= maxr; ++r) {
        bool all_full = true;
        std::vector<int> pick(r);
        for (int i = 0; i < r; ++i) pick[i] = i;
        for (;;) {
            Matrix sub(A.rows(), r);
            for (int i = 0; i < r; ++i) sub.col(i) = A.col(pick[i]);
            Vector s = singular_values(sub);
            if (!(s[r - 1] > 1e-9 * s[0])) {
                all_full = false;
                break;
            }
            int pos = r - 1;
            while (pos >= 0 && pick[pos] == cols - r + pos) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int i = pos + 1; i < r; ++i) pick[i] = pick[i - 1] + 1;
        }
        if (!all_full) break;
        best = r;
    }
    return best;
}

}  // namespace mixprod

#endif
