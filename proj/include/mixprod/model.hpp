#ifndef MIXPROD_MODEL_HPP
#define MIXPROD_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/rng.hpp"

namespace mixprod {

// A mixture of k product distributions over n binary observables. Column j of
// m holds the conditional means of all observables given hidden state j;
// pi holds the mixing weights. Parameters are identifiable only up to a
// simultaneous permutation of pi entries and m columns.
struct MixtureModel {
    int k = 0;
    int n = 0;
    Vector pi;  // size k
    Matrix m;   // n x k, entries in [0, 1]

    // Structural invariants. Call sites that accept external data (file IO,
    // CLI) validate; recovered parameters that may sit a few ulps outside
    // [0,1] are kept as plain structs instead.
    void validate() const {
        if (k < 1) throw PreconditionFailed("model: k must be >= 1");
        if (n < 0) throw PreconditionFailed("model: n must be >= 0");
        if (pi.size() != k) throw PreconditionFailed("model: pi must have length k");
        if (m.rows() != n || m.cols() != k)
            throw PreconditionFailed("model: m must be n x k");
        for (int j = 0; j < k; ++j) {
            if (!std::isfinite(pi[j]) || pi[j] < 0.0)
                throw PreconditionFailed("model: pi[" + std::to_string(j) + "] must be >= 0");
        }
        if (std::abs(pi.sum() - 1.0) > 1e-12)
            throw PreconditionFailed("model: pi must sum to 1 within 1e-12");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                double v = m(i, j);
                if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                    throw PreconditionFailed("model: m[" + std::to_string(i) + "][" +
                                             std::to_string(j) + "] must lie in [0, 1]");
            }
    }
};

// The problem class: every pair of conditional means in a row separated by at
// least zeta, every mixing weight at least pi_min.
struct ModelClassParams {
    double zeta = 0.0;
    double pi_min = 0.0;

    void validate() const {
        if (!(zeta >= 0.0) || !std::isfinite(zeta))
            throw PreconditionFailed("class params: zeta must be >= 0");
        if (!(pi_min >= 0.0) || !(pi_min <= 1.0))
            throw PreconditionFailed("class params: pi_min must lie in [0, 1]");
    }
};

struct MembershipReport {
    bool ok = true;
    std::string first_violation;       // empty when ok
    bool zeta_above_generic_cap = false;  // zeta > 1/(k-1): class may be empty

    explicit operator bool() const { return ok; }
};

// Checks membership of `model` in the class (zeta, pi_min). Reports the first
// failing weight j or row pair (i, j, j'). zeta > 1/(k-1) is flagged as a
// warning only; such classes are empty for means confined to [0, 1] but the
// check itself stays meaningful.
inline MembershipReport validate_membership(const MixtureModel& model,
                                            const ModelClassParams& params) {
    params.validate();
    MembershipReport rep;
    if (model.k >= 2) rep.zeta_above_generic_cap = params.zeta > 1.0 / (model.k - 1);
    for (int j = 0; j < model.k; ++j) {
        if (model.pi[j] < params.pi_min) {
            rep.ok = false;
            std::ostringstream os;
            os << "pi[" << j << "] = " << model.pi[j] << " < pi_min = " << params.pi_min;
            rep.first_violation = os.str();
            return rep;
        }
    }
    for (int i = 0; i < model.n; ++i)
        for (int j = 0; j < model.k; ++j)
            for (int j2 = j + 1; j2 < model.k; ++j2) {
                if (std::abs(model.m(i, j) - model.m(i, j2)) < params.zeta) {
                    rep.ok = false;
                    std::ostringstream os;
                    os << "row " << i << ": |m[" << i << "][" << j << "] - m[" << i << "]["
                       << j2 << "]| = " << std::abs(model.m(i, j) - model.m(i, j2))
                       << " < zeta = " << params.zeta;
                    rep.first_violation = os.str();
                    return rep;
                }
            }
    return rep;
}

// Applies one permutation to hidden-state labels: pi and m columns move
// together. perm[j] = source column placed at position j.
inline MixtureModel permute_columns(const MixtureModel& model, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != model.k)
        throw PreconditionFailed("permute_columns: permutation length must equal k");
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= model.k || seen[p])
            throw PreconditionFailed("permute_columns: not a permutation of [0, k)");
        seen[p] = true;
    }
    MixtureModel out = model;
    for (int j = 0; j < model.k; ++j) {
        out.pi[j] = model.pi[perm[j]];
        out.m.col(j) = model.m.col(perm[j]);
    }
    return out;
}

// Parameter distance up to hidden-label permutation:
//   min over permutations rho of max(max_j |pi_j - pi'_rho(j)|,
//                                    max_{i,j} |m_ij - m'_i,rho(j)|).
// Exhaustive over all k! permutations; capped at k <= 10.
inline double model_distance(const MixtureModel& a, const MixtureModel& b) {
    if (a.k != b.k || a.n != b.n)
        throw PreconditionFailed("model_distance: dimension mismatch");
    if (a.k > 10)
        throw PreconditionFailed("model_distance: permutation enumeration capped at k = 10");
    std::vector<int> perm(a.k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double d = 0.0;
        for (int j = 0; j < a.k && d < best; ++j) {
            d = std::max(d, std::abs(a.pi[j] - b.pi[perm[j]]));
            for (int i = 0; i < a.n; ++i)
                d = std::max(d, std::abs(a.m(i, j) - b.m(i, perm[j])));
        }
        best = std::min(best, d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

namespace detail {

// One zeta-separated row: k uniform draws in [0, 1-(k-1)*zeta], sorted, with
// (j-1)*zeta added to the j-th. The sampling interval is shrunk by a relative
// 1e-12 and gaps are re-enforced with nextafter so the exact ">= zeta"
// membership comparison survives the rounding of u_(j) + (j-1)*zeta. At the
// feasibility boundary (k-1)*zeta == 1 the tight progression is not exactly
// representable; values are then clamped into [0, 1] from the top down and
// the squeezed gaps may fall short of zeta by a few ulps.
inline std::vector<double> separated_row(int k, double zeta, Rng& rng) {
    double span = (1.0 - (k - 1) * zeta) * (1.0 - 1e-12);
    if (span < 0.0) span = 0.0;
    std::vector<double> u(k);
    for (double& v : u) v = rng.uniform(0.0, span);
    std::sort(u.begin(), u.end());
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = u[j] + j * zeta;
    for (int j = 1; j < k; ++j)
        while (row[j] - row[j - 1] < zeta)
            row[j] = std::nextafter(row[j], std::numeric_limits<double>::infinity());
    if (row[k - 1] > 1.0) {
        row[k - 1] = 1.0;
        for (int j = k - 2; j >= 0; --j)
            while (row[j + 1] - row[j] < zeta && row[j] > 0.0)
                row[j] = std::max(0.0, std::nextafter(row[j], -1.0));
    }
    return row;
}

}  // namespace detail

// Seeded draw from the class (zeta, pi_min): every row zeta-separated, one
// shared column shuffle across rows, pi uniform on the simplex then mixed
// toward the uniform vector just enough to reach pi_min.
inline MixtureModel random_model(int k, int n, double zeta, double pi_min,
                                 std::uint64_t seed) {
    if (k < 1 || n < 0) throw PreconditionFailed("random_model: need k >= 1, n >= 0");
    if (k >= 2 && (k - 1) * zeta > 1.0)
        throw PreconditionFailed("random_model: infeasible separation, (k-1)*zeta > 1");
    if (!(zeta >= 0.0)) throw PreconditionFailed("random_model: zeta must be >= 0");
    if (k * pi_min > 1.0)
        throw PreconditionFailed("random_model: infeasible weights, k*pi_min > 1");
    if (!(pi_min >= 0.0)) throw PreconditionFailed("random_model: pi_min must be >= 0");

    MixtureModel model;
    model.k = k;
    model.n = n;
    model.m.resize(n, k);
    model.pi.resize(k);

    Rng rows_rng = Rng::substream(seed, 0);
    Matrix sorted_rows(n, k);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row = detail::separated_row(k, zeta, rows_rng);
        for (int j = 0; j < k; ++j) sorted_rows(i, j) = row[j];
    }

    // One shuffle shared by all rows keeps every row's separation intact while
    // de-correlating column identity from magnitude order.
    std::vector<int> shuffle(k);
    std::iota(shuffle.begin(), shuffle.end(), 0);
    Rng perm_rng = Rng::substream(seed, 1);
    for (int j = k - 1; j > 0; --j)
        std::swap(shuffle[j], shuffle[perm_rng.below(static_cast<std::uint64_t>(j) + 1)]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) model.m(i, j) = sorted_rows(i, shuffle[j]);

    Rng pi_rng = Rng::substream(seed, 2);
    Vector pi(k);
    double sum = 0.0;
    do {
        sum = 0.0;
        for (int j = 0; j < k; ++j) {
            pi[j] = -std::log1p(-pi_rng.uniform01());  // Exp(1); uniform simplex after normalizing
            sum += pi[j];
        }
    } while (sum <= 0.0);
    pi /= sum;

    // Smallest t with min_j((1-t)*pi_j + t/k) >= pi_min; t = 1 collapses to the
    // exact uniform vector.
    double t = 0.0;
    for (int j = 0; j < k; ++j) {
        if (pi[j] >= pi_min) continue;
        double denom = 1.0 / k - pi[j];
        if (denom <= 0.0) continue;
        t = std::max(t, (pi_min - pi[j]) / denom);
    }
    t = std::min(t, 1.0);
    if (t > 0.0)
        for (int j = 0; j < k; ++j) pi[j] = (1.0 - t) * pi[j] + t * (1.0 / k);
    // The mix can round a single ulp below the floor; nudge those entries back
    // up. The sum moves by at most k ulps, well inside validation tolerance.
    for (int j = 0; j < k; ++j)
        while (pi[j] < pi_min)
            pi[j] = std::nextafter(pi[j], std::numeric_limits<double>::infinity());
    model.pi = pi;
    return model;
}

}  // namespace mixprod

#endif
