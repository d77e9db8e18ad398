#ifndef MIXPROD_MOMENTS_HPP
#define MIXPROD_MOMENTS_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/hadamard.hpp"
#include "mixprod/model.hpp"

namespace mixprod {

struct MomentProvenance {
    bool exact = false;
    std::uint64_t sample_count = 0;  // 0 when exact or unknown (external file)
};

// All 2^n multilinear moments mu(S) = E[prod_{i in S} X_i], stored dense in
// ascending bitmask order. values[0] = mu(empty set) = 1.
struct MomentVector {
    int n = 0;
    Vector values;  // size 2^n
    MomentProvenance provenance;

    double operator[](Mask S) const { return values[static_cast<long>(S)]; }

    void validate() const {
        if (n < 0 || n > 24)
            throw PreconditionFailed("moments: n must lie in [0, 24] (dense 2^n storage)");
        if (values.size() != (long{1} << n))
            throw PreconditionFailed("moments: values must have length 2^n");
        if (!values.allFinite()) throw PreconditionFailed("moments: non-finite entry");
    }
};

// Disjoint index sets S, T and an anchor observable outside both. S and T
// index the rows/columns of the pair matrices; the anchor provides the
// eigenvalues that separate components.
struct SubsetPartition {
    std::vector<int> S;
    std::vector<int> T;
    int anchor = 0;

    void validate(int n) const {
        auto check_sorted_unique = [&](const std::vector<int>& v, const char* name) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i] < 0 || v[i] >= n)
                    throw PreconditionFailed(std::string("partition: ") + name +
                                             " index out of range [0, n)");
                if (i > 0 && v[i] <= v[i - 1])
                    throw PreconditionFailed(std::string("partition: ") + name +
                                             " must be sorted and duplicate-free");
            }
        };
        check_sorted_unique(S, "S");
        check_sorted_unique(T, "T");
        if (anchor < 0 || anchor >= n)
            throw PreconditionFailed("partition: anchor out of range [0, n)");
        for (int s : S)
            for (int t : T)
                if (s == t) throw PreconditionFailed("partition: S and T must be disjoint");
        for (int s : S)
            if (s == anchor) throw PreconditionFailed("partition: anchor must avoid S");
        for (int t : T)
            if (t == anchor) throw PreconditionFailed("partition: anchor must avoid T");
    }

    std::vector<int> union_sorted() const {
        std::vector<int> a;
        a.reserve(S.size() + T.size() + 1);
        a.insert(a.end(), S.begin(), S.end());
        a.insert(a.end(), T.begin(), T.end());
        a.push_back(anchor);
        std::sort(a.begin(), a.end());
        return a;
    }
};

// C[A][B] = mu(A u B) and C1[A][B] = mu(A u B u {anchor}) over local bitmasks
// A of S (rows) and B of T (columns).
struct PairMatrices {
    Matrix C;
    Matrix C1;
};

// The model-to-statistics map gamma(pi, m)(S) = sum_j pi_j prod_{i in S} m_ij,
// i.e. H(m) * pi over all subsets. No validation: also used on recovered
// parameters that may sit slightly outside the model class.
inline Vector gamma_moments(const Vector& pi, const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    if (n > 24) throw PreconditionFailed("gamma_moments: n capped at 24");
    if (pi.size() != m.cols()) throw PreconditionFailed("gamma_moments: pi/m size mismatch");
    const std::size_t size = std::size_t{1} << n;
    Vector out(size);
    // One subset-product vector per component, accumulated; memory O(2^n).
    Vector prod(size);
    out.setZero();
    for (int j = 0; j < pi.size(); ++j) {
        prod[0] = 1.0;
        for (Mask S = 1; S < size; ++S) {
            int low = std::countr_zero(S);
            prod[S] = prod[S ^ (Mask{1} << low)] * m(low, j);
        }
        out += pi[j] * prod;
    }
    out[0] = 1.0;
    return out;
}

inline MomentVector exact_moments(const MixtureModel& model) {
    model.validate();
    if (model.n > 24)
        throw PreconditionFailed("exact_moments: n capped at 24 (dense 2^n storage)");
    MomentVector mu;
    mu.n = model.n;
    mu.values = gamma_moments(model.pi, model.m);
    mu.provenance = {true, 0};
    return mu;
}

// Plug-in estimates from an N x n binary sample matrix: one counting pass over
// the samples, then a superset-sum (zeta) transform, O(N*n + n*2^n) total.
inline MomentVector empirical_moments(const SampleMatrix& samples) {
    const long N = samples.rows();
    const int n = static_cast<int>(samples.cols());
    if (N < 1) throw PreconditionFailed("empirical_moments: need at least one sample");
    if (n > 24) throw PreconditionFailed("empirical_moments: n capped at 24");
    const std::size_t size = std::size_t{1} << n;
    std::vector<std::uint64_t> count(size, 0);
    for (long s = 0; s < N; ++s) {
        Mask support = 0;
        for (int i = 0; i < n; ++i) {
            std::uint8_t v = samples(s, i);
            if (v > 1)
                throw PreconditionFailed("empirical_moments: non-binary entry at sample " +
                                         std::to_string(s));
            support |= Mask{v} << i;
        }
        ++count[support];
    }
    // count[S] <- number of samples whose support contains S.
    for (int i = 0; i < n; ++i)
        for (Mask S = 0; S < size; ++S)
            if (!(S & (Mask{1} << i))) count[S] += count[S | (Mask{1} << i)];
    MomentVector mu;
    mu.n = n;
    mu.values.resize(size);
    for (Mask S = 0; S < size; ++S)
        mu.values[S] = static_cast<double>(count[S]) / static_cast<double>(N);
    mu.values[0] = 1.0;
    mu.provenance = {false, static_cast<std::uint64_t>(N)};
    return mu;
}

// Relabels the moments of the observables in sorted `ids` as a standalone
// |ids|-variable moment vector.
inline MomentVector restrict_moments(const MomentVector& mu, const std::vector<int>& ids) {
    mu.validate();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= mu.n)
            throw PreconditionFailed("restrict_moments: index out of range");
        if (i > 0 && ids[i] <= ids[i - 1])
            throw PreconditionFailed("restrict_moments: ids must be sorted and duplicate-free");
    }
    MomentVector out;
    out.n = static_cast<int>(ids.size());
    out.values.resize(long{1} << out.n);
    for (Mask L = 0; L < (Mask{1} << out.n); ++L) out.values[L] = mu[expand_mask(L, ids)];
    out.provenance = mu.provenance;
    return out;
}

inline PairMatrices assemble_pair_matrices(const MomentVector& mu, const SubsetPartition& p) {
    mu.validate();
    p.validate(mu.n);
    const int s = static_cast<int>(p.S.size());
    const int t = static_cast<int>(p.T.size());
    PairMatrices pm;
    pm.C.resize(long{1} << s, long{1} << t);
    pm.C1.resize(long{1} << s, long{1} << t);
    const Mask anchor_bit = Mask{1} << p.anchor;
    for (Mask a = 0; a < (Mask{1} << s); ++a) {
        Mask ga = expand_mask(a, p.S);
        for (Mask b = 0; b < (Mask{1} << t); ++b) {
            Mask g = ga | expand_mask(b, p.T);
            pm.C(a, b) = mu[g];
            pm.C1(a, b) = mu[g | anchor_bit];
        }
    }
    return pm;
}

// Statistical distance max_S |mu(S) - mu'(S)| between two moment vectors on
// the same observables.
inline double stat_distance(const MomentVector& a, const MomentVector& b) {
    if (a.n != b.n) throw PreconditionFailed("stat_distance: dimension mismatch");
    if (a.values.size() != b.values.size())
        throw PreconditionFailed("stat_distance: length mismatch");
    return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace mixprod

#endif
