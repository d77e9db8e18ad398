#ifndef MIXPROD_IDENTIFY_HPP
#define MIXPROD_IDENTIFY_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/linalg.hpp"
#include "mixprod/moments.hpp"

namespace mixprod {

struct IdentifyOptions {
    // sigma_k(C~) <= rank_tol * sigma_1(C~) rejects the partition.
    double rank_tol = 1e-10;
    // Adjacent sorted eigenvalues closer than sep_tol * (spectrum magnitude)
    // cannot be paired safely across the two factors.
    double sep_tol = 1e-7;
    // |(U~ S~)_{empty,j}| below this blocks the all-ones row normalization.
    double row0_tol = 1e-10;
    // |pi~_j| at or below this blocks divisions by recovered weights.
    double pi_tol = 1e-10;
    // Imaginary residual tolerance for the eigen pencils, relative to ||A||.
    double imag_tol = 1e-6;
    // Clamp negatives in the reported pi~ and renormalize (off: raw solve).
    bool project_simplex = false;
    // Search: smallest |S| = |T| tried; -1 means ceil(log2 k). Sizes below
    // k-1 lose the worst-case guarantee but often identify in fewer moments.
    int min_subset_size = -1;
    // Search: refuse enumerations larger than this many candidate partitions.
    std::uint64_t max_candidates = 1000000;
};

struct IdentifyDiagnostics {
    double sigma_k_Ctilde = 0.0;     // measured k-th singular value of C~
    double eig_imag_residual = 0.0;  // largest imaginary magnitude discarded
    double eig_defect = 0.0;         // largest ||A v - lambda v|| over both pencils
    double fit_residual = 0.0;       // max |gamma(pi~, m~) - mu^| over the used subset
    Vector column_scales;            // multipliers applied to S^'s columns
    Vector anchor_eigenvalues;       // sorted anchor means from the pencil
    bool full_size_partition = false;  // |S| = |T| = k-1: worst-case-guarantee tier
};

// Output of one identification run. m_tilde rows follow the sorted union of
// S, T and the anchor; columns are ordered by descending recovered anchor
// mean. The projected factors are kept so further observables can be appended
// without repeating the decomposition.
struct IdentificationResult {
    Vector pi_tilde;
    Matrix m_tilde;  // |S|+|T|+1 rows, k columns
    SubsetPartition partition;
    IdentifyDiagnostics diagnostics;
    Matrix U_hat;  // 2^|S| x k, left singular block of C~
    Matrix V_hat;  // 2^|T| x k, right singular block of C~
    Matrix S_hat;  // k x k, rescaled eigenvectors of C^1 C^-1
    Matrix T_hat;  // k x k, rescaled eigenvectors of C^1^T C^-T
};

namespace detail {

// Rescales each eigenvector column so the lifted factor has an all-ones
// empty-set row, fixing the scale freedom the eigendecomposition leaves.
inline Vector normalize_columns(Matrix& E, const Matrix& lift, double row0_tol,
                                const char* which) {
    const int k = static_cast<int>(E.cols());
    Vector scales(k);
    Eigen::RowVectorXd row0 = lift.row(0) * E;
    for (int j = 0; j < k; ++j) {
        if (std::abs(row0[j]) < row0_tol)
            throw NormalizationUnstable(std::string("identify: empty-set row of lifted ") +
                                        which + " column " + std::to_string(j) +
                                        " is " + std::to_string(row0[j]) +
                                        ", cannot normalize");
        scales[j] = 1.0 / row0[j];
        E.col(j) *= scales[j];
    }
    return scales;
}

}  // namespace detail

// Recovers (pi, m restricted to S u T u {anchor}) from the moments through a
// simultaneous diagonalization of the pair matrices C and C1:
//   C = U Sigma V^T, project both onto the top-k singular blocks, then the
//   eigenvectors of (U^T C1 V)(U^T C V)^-1 and its transpose recover the two
//   extension factors up to scale, fixed by the all-ones empty-set row. The
//   mixing weights follow from one linear solve against mu restricted to S;
//   each mean row from one solve against a column (or row) of C / C1.
inline IdentificationResult identify(const MomentVector& mu, int k,
                                     const SubsetPartition& p,
                                     const IdentifyOptions& opts = {}) {
    mu.validate();
    p.validate(mu.n);
    if (k < 1) throw PreconditionFailed("identify: k must be >= 1");
    if (p.S.size() != p.T.size())
        throw PreconditionFailed("identify: |S| and |T| must match");
    const int s = static_cast<int>(p.S.size());
    if ((std::size_t{1} << s) < static_cast<std::size_t>(k))
        throw PreconditionFailed("identify: 2^|S| < k, subsets cannot expose k components");

    PairMatrices pm = assemble_pair_matrices(mu, p);

    SvdResult dec = svd(pm.C);
    const double sig1 = dec.sigma[0];
    const double sigk = dec.sigma[k - 1];
    if (!(sigk > opts.rank_tol * sig1)) {
        double ratio = sig1 == 0.0 ? 0.0 : sigk / sig1;
        throw RankDeficient(ratio, "identify: sigma_k/sigma_1 of the pair matrix = " +
                                       std::to_string(ratio) +
                                       ", fewer than k components visible on (S, T)");
    }

    Matrix U = dec.U.leftCols(k);
    Matrix V = dec.V.leftCols(k);
    Matrix C = U.transpose() * pm.C * V;    // ~ diag(sigma_1..sigma_k)
    Matrix C1 = U.transpose() * pm.C1 * V;

    // Both pencils share the anchor means as spectrum; eigenvectors are the
    // projected extension factors of S and T respectively.
    Matrix MS = C.transpose().partialPivLu().solve(C1.transpose()).transpose();  // C1 C^-1
    Matrix MT = C.partialPivLu().solve(C1).transpose();                          // C1^T C^-T

    double imag_tol_S = opts.imag_tol * operator_norm_estimate(MS);
    double imag_tol_T = opts.imag_tol * operator_norm_estimate(MT);
    EigResult eigS = eig_real(MS, imag_tol_S);
    EigResult eigT = eig_real(MT, imag_tol_T);

    auto check_collision = [&](const Vector& ev) {
        if (k < 2) return;
        // Gap threshold is relative to the magnitude of the spectrum, not to
        // the spread: a spectrum collapsed to one point has spread of pure
        // rounding noise and would always pass its own gap test.
        double scale = std::max(std::abs(ev[0]), std::abs(ev[k - 1]));
        if (scale == 0.0)
            throw EigenvalueCollision(
                "identify: all anchor means are zero, components indistinguishable");
        for (int j = 0; j + 1 < k; ++j)
            if (ev[j] - ev[j + 1] < opts.sep_tol * scale)
                throw EigenvalueCollision(
                    "identify: anchor means " + std::to_string(j) + " and " +
                    std::to_string(j + 1) + " separated by " + std::to_string(ev[j] - ev[j + 1]) +
                    " < " + std::to_string(opts.sep_tol * scale) +
                    ", eigenvector pairing unsafe (anchor under-separated)");
    };
    check_collision(eigS.eigenvalues);
    check_collision(eigT.eigenvalues);

    Matrix Shat = eigS.eigenvectors;
    Matrix That = eigT.eigenvectors;
    Vector scalesS = detail::normalize_columns(Shat, U, opts.row0_tol, "S factor");
    detail::normalize_columns(That, V, opts.row0_tol, "T factor");

    IdentificationResult res;
    res.partition = p;
    res.U_hat = U;
    res.V_hat = V;
    res.S_hat = Shat;
    res.T_hat = That;
    res.diagnostics.sigma_k_Ctilde = sigk;
    res.diagnostics.eig_imag_residual = std::max(eigS.max_imag_residual, eigT.max_imag_residual);
    res.diagnostics.eig_defect = std::max(eigS.max_defect, eigT.max_defect);
    res.diagnostics.column_scales = scalesS;
    res.diagnostics.anchor_eigenvalues = eigS.eigenvalues;
    res.diagnostics.full_size_partition = (s == k - 1);

    // Mixing weights: pi~ = S^-1 U^T (mu(R))_{R subseteq S}; that moment
    // vector is exactly column 0 of C.
    res.pi_tilde = solve(Shat, U.transpose() * pm.C.col(0));

    // Mean rows. For i in T u {anchor} the needed vector (mu(R u {i}))_{R
    // subseteq S} is a column of C / C1; for i in S it is a row of C.
    std::vector<int> used = p.union_sorted();
    const int n_used = static_cast<int>(used.size());
    res.m_tilde.resize(n_used, k);
    auto assign_row = [&](int global_i, const Vector& w) {
        int r = static_cast<int>(std::lower_bound(used.begin(), used.end(), global_i) -
                                 used.begin());
        for (int j = 0; j < k; ++j) res.m_tilde(r, j) = w[j] / res.pi_tilde[j];
    };
    assign_row(p.anchor, solve(Shat, U.transpose() * pm.C1.col(0)));
    for (int t = 0; t < static_cast<int>(p.T.size()); ++t)
        assign_row(p.T[t], solve(Shat, U.transpose() * pm.C.col(long{1} << t)));
    for (int si = 0; si < s; ++si)
        assign_row(p.S[si],
                   solve(That, V.transpose() * pm.C.row(long{1} << si).transpose()));

    if (opts.project_simplex) {
        for (int j = 0; j < k; ++j) res.pi_tilde[j] = std::max(0.0, res.pi_tilde[j]);
        double sum = res.pi_tilde.sum();
        if (sum > 0.0) res.pi_tilde /= sum;
    }

    // Fit: how well the recovered parameters reproduce the supplied moments
    // on the subset actually used.
    MomentVector mu_used = restrict_moments(mu, used);
    Vector fitted = gamma_moments(res.pi_tilde, res.m_tilde);
    res.diagnostics.fit_residual = (fitted - mu_used.values).cwiseAbs().maxCoeff();
    return res;
}

namespace detail {

inline std::uint64_t binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    std::uint64_t v = 1;
    for (int i = 0; i < r; ++i) v = v * static_cast<std::uint64_t>(n - i) / (i + 1);
    return v;
}

// Candidate partitions in the tie-break order (|S|, S, T, anchor), S and T
// lexicographic as sorted index lists, anchor ascending.
inline std::vector<SubsetPartition> enumerate_partitions(int n, int s_min, int s_max,
                                                         std::uint64_t max_candidates) {
    std::uint64_t total = 0;
    for (int s = s_min; s <= s_max; ++s) {
        if (2 * s + 1 > n) continue;
        total += binomial(n, s) * binomial(n - s, s) * static_cast<std::uint64_t>(n - 2 * s);
        if (total > max_candidates)
            throw PreconditionFailed("identify_search: candidate count exceeds limit " +
                                     std::to_string(max_candidates));
    }

    std::vector<SubsetPartition> out;
    out.reserve(total);
    auto combinations = [](const std::vector<int>& pool, int r) {
        std::vector<std::vector<int>> combos;
        if (r == 0) {
            combos.push_back({});
            return combos;
        }
        if (r > static_cast<int>(pool.size())) return combos;
        std::vector<int> pick(r);
        for (int i = 0; i < r; ++i) pick[i] = i;
        const int m = static_cast<int>(pool.size());
        for (;;) {
            std::vector<int> c(r);
            for (int i = 0; i < r; ++i) c[i] = pool[pick[i]];
            combos.push_back(std::move(c));
            int pos = r - 1;
            while (pos >= 0 && pick[pos] == m - r + pos) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int i = pos + 1; i < r; ++i) pick[i] = pick[i - 1] + 1;
        }
        return combos;
    };

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int s = s_min; s <= s_max; ++s) {
        if (2 * s + 1 > n) continue;
        for (auto& S : combinations(all, s)) {
            std::vector<int> restS;
            for (int i : all)
                if (!std::binary_search(S.begin(), S.end(), i)) restS.push_back(i);
            for (auto& T : combinations(restS, s)) {
                for (int a : restS) {
                    if (std::binary_search(T.begin(), T.end(), a)) continue;
                    SubsetPartition p;
                    p.S = S;
                    p.T = T;
                    p.anchor = a;
                    out.push_back(std::move(p));
                }
            }
        }
    }
    return out;
}

}  // namespace detail

// Tries every admissible partition, keeps the one whose recovered parameters
// reproduce the supplied moments best (smallest fit residual over the used
// subset). Ties and the enumeration order resolve to the lexicographically
// smallest (|S|, S, T, anchor). Candidates that fail (rank, spectrum,
// pairing, normalization) are skipped.
inline IdentificationResult identify_search(const MomentVector& mu, int k,
                                            const IdentifyOptions& opts = {}) {
    mu.validate();
    if (k < 1) throw PreconditionFailed("identify_search: k must be >= 1");
    if (mu.n < 2 * k - 1)
        throw PreconditionFailed("identify_search: need n >= 2k-1 observables");
    int s_min = opts.min_subset_size;
    if (s_min < 0) {
        s_min = 0;
        while ((1 << s_min) < k) ++s_min;  // ceil(log2 k)
    }
    int s_max = std::max(k - 1, s_min);
    std::vector<SubsetPartition> cands =
        detail::enumerate_partitions(mu.n, s_min, s_max, opts.max_candidates);
    if (cands.empty()) throw NoViableCandidate("identify_search: no admissible partition");

    std::vector<double> fit(cands.size(), std::numeric_limits<double>::infinity());
    std::vector<std::optional<IdentificationResult>> results(cands.size());
    parallel_for(cands.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            try {
                IdentificationResult r = identify(mu, k, cands[c], opts);
                if (std::isfinite(r.diagnostics.fit_residual)) {
                    fit[c] = r.diagnostics.fit_residual;
                    results[c] = std::move(r);
                }
            } catch (const Error&) {
                // skipped candidate
            }
        }
    });

    std::size_t best = cands.size();
    for (std::size_t c = 0; c < cands.size(); ++c)
        if (results[c] && (best == cands.size() || fit[c] < fit[best])) best = c;
    if (best == cands.size())
        throw NoViableCandidate("identify_search: every candidate partition failed");
    return std::move(*results[best]);
}

// Appends the mean row of every observable outside the identification subset
// by the same linear solve the in-subset rows used (against the T factor).
// Rows already inside the subset are carried over unchanged. Returns the full
// n x k mean matrix in observable order.
inline Matrix extend_to_all_observables(const IdentificationResult& res,
                                        const MomentVector& mu,
                                        const IdentifyOptions& opts = {}) {
    mu.validate();
    const int k = static_cast<int>(res.pi_tilde.size());
    for (int j = 0; j < k; ++j)
        if (!(std::abs(res.pi_tilde[j]) > opts.pi_tol))
            throw DegeneratePi("extend: |pi~[" + std::to_string(j) + "]| = " +
                               std::to_string(std::abs(res.pi_tilde[j])) +
                               " <= tolerance, cannot divide by recovered weight");
    std::vector<int> used = res.partition.union_sorted();
    Matrix full(mu.n, k);
    const int t = static_cast<int>(res.partition.T.size());
    Vector v(long{1} << t);
    for (int i = 0; i < mu.n; ++i) {
        auto it = std::lower_bound(used.begin(), used.end(), i);
        if (it != used.end() && *it == i) {
            full.row(i) = res.m_tilde.row(it - used.begin());
            continue;
        }
        for (Mask B = 0; B < (Mask{1} << t); ++B)
            v[B] = mu[expand_mask(B, res.partition.T) | (Mask{1} << i)];
        Vector w = solve(res.T_hat, res.V_hat.transpose() * v);
        for (int j = 0; j < k; ++j) full(i, j) = w[j] / res.pi_tilde[j];
    }
    return full;
}

}  // namespace mixprod

#endif
