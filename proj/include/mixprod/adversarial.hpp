#ifndef MIXPROD_ADVERSARIAL_HPP
#define MIXPROD_ADVERSARIAL_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/hadamard.hpp"
#include "mixprod/linalg.hpp"
#include "mixprod/model.hpp"
#include "mixprod/moments.hpp"

namespace mixprod {

// Two models that are far apart in parameters yet nearly indistinguishable in
// every multilinear moment. All gaps are re-measured at construction time;
// sigma is the measured k-th singular value of the full extension H(m),
// alpha the kernel direction the weight perturbation follows.
struct AdversarialPair {
    MixtureModel base;
    MixtureModel alternate;
    double sigma = 0.0;
    Vector alpha;
    double eps = 0.0;
    double certified_model_gap = 0.0;  // measured, > eps
    double certified_stat_gap = 0.0;   // measured, <= 4 k sigma eps
};

// The canonical ill-conditioned member of the class: every row the arithmetic
// progression (0, zeta, ..., (k-1) zeta), uniform weights. Identical rows
// drive sigma_k(H(m)) exponentially small while keeping exact zeta-separation.
inline MixtureModel near_singular_model(int k, int n, double zeta) {
    if (k < 1) throw PreconditionFailed("near_singular_model: k must be >= 1");
    if (n < k - 1) throw PreconditionFailed("near_singular_model: need n >= k-1");
    if (!(zeta >= 0.0) || (k - 1) * zeta > 1.0)
        throw PreconditionFailed("near_singular_model: need 0 <= (k-1)*zeta <= 1");
    MixtureModel model;
    model.k = k;
    model.n = n;
    model.pi = Vector::Constant(k, 1.0 / k);
    model.m.resize(n, k);
    // j * zeta can round an adjacent gap one ulp under zeta; nudge upward so
    // exact ">= zeta" membership survives (same convention as random_model).
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = j * zeta;
    for (int j = 1; j < k; ++j)
        while (row[j] - row[j - 1] < zeta)
            row[j] = std::nextafter(row[j], std::numeric_limits<double>::infinity());
    if (k >= 1 && row[k - 1] > 1.0)
        throw PreconditionFailed("near_singular_model: separation infeasible after rounding");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) model.m(i, j) = row[j];
    return model;
}

// Given a model whose full extension is nearly rank-deficient
// (sigma_k(H(m)) < 1/2), moves the weights along the kernel direction to
// create a second model in the class that no statistic distinguishes beyond
// 4 k sigma eps, while the parameters move by more than eps.
inline AdversarialPair confusable_pair(const MixtureModel& model,
                                       const ModelClassParams& params, double eps) {
    model.validate();
    if (model.n > 20)
        throw PreconditionFailed("confusable_pair: n capped at 20 (materializes 2^n rows)");
    MembershipReport rep = validate_membership(model, params);
    if (!rep)
        throw PreconditionFailed("confusable_pair: model outside class: " +
                                 rep.first_violation);
    const int k = model.k;
    double eps_cap = std::min(params.pi_min / (4.0 * std::sqrt(static_cast<double>(k))),
                              params.zeta);
    if (!(eps > 0.0) || !(eps < eps_cap))
        throw PreconditionFailed("confusable_pair: need 0 < eps < min(pi_min/(4 sqrt k), zeta) = " +
                                 std::to_string(eps_cap));

    HadamardExtension H = hadamard_extension(model.m);
    SvdResult dec = svd_thin(H.data);
    double sigma = dec.sigma[k - 1];
    if (!(sigma < 0.5))
        throw PreconditionFailed("confusable_pair: sigma_k(H(m)) = " + std::to_string(sigma) +
                                 " >= 1/2, extension not close enough to rank deficiency");

    // Kernel direction of the best rank-(k-1) approximation; sign fixed so the
    // largest-magnitude entry is positive.
    Vector alpha = dec.V.col(k - 1);
    int arg = 0;
    for (int j = 1; j < k; ++j)
        if (std::abs(alpha[j]) > std::abs(alpha[arg])) arg = j;
    if (alpha[arg] < 0.0) alpha = -alpha;

    double ones_alpha = alpha.sum();
    if (!(std::abs(ones_alpha) <= sigma + 1e-12))
        throw CertificateViolation("confusable_pair: |1^T alpha| = " +
                                   std::to_string(std::abs(ones_alpha)) +
                                   " exceeds sigma = " + std::to_string(sigma));

    AdversarialPair pair;
    pair.base = model;
    pair.alternate = model;
    pair.sigma = sigma;
    pair.alpha = alpha;
    pair.eps = eps;
    double step = 2.0 * std::sqrt(static_cast<double>(k)) * eps;
    pair.alternate.pi = model.pi + step * alpha;
    pair.alternate.pi[0] -= step * ones_alpha;

    if (std::abs(pair.alternate.pi.sum() - 1.0) > 1e-12)
        throw CertificateViolation("confusable_pair: perturbed weights do not sum to 1");
    if (pair.alternate.pi.minCoeff() < params.pi_min / 4.0)
        throw CertificateViolation("confusable_pair: perturbed weight below pi_min/4");

    pair.certified_model_gap = model_distance(pair.base, pair.alternate);
    if (!(pair.certified_model_gap > eps))
        throw CertificateViolation("confusable_pair: parameter gap " +
                                   std::to_string(pair.certified_model_gap) +
                                   " not above eps");
    MomentVector mu_base = exact_moments(pair.base);
    MomentVector mu_alt = exact_moments(pair.alternate);
    pair.certified_stat_gap = stat_distance(mu_base, mu_alt);
    if (!(pair.certified_stat_gap <= 4.0 * k * sigma * eps))
        throw CertificateViolation("confusable_pair: statistic gap " +
                                   std::to_string(pair.certified_stat_gap) +
                                   " exceeds 4 k sigma eps");
    return pair;
}

// Ready-made sample-complexity obstruction at size n = 2k-1: the
// near-singular model with zeta = 1/(8k) and pi_min = 1/(4k). The closed-form
// bound (2k-1) 2^(2k-1) (k zeta)^k on sigma_k(H(m)) is checked to be < 1/2
// and against the measured sigma. Pass eps <= 0 for the default, half the
// admissible cap.
inline AdversarialPair lower_bound_instance(int k, double eps = 0.0) {
    if (k < 2) throw PreconditionFailed("lower_bound_instance: k must be >= 2");
    const double zeta = 1.0 / (8.0 * k);
    const double pi_min = 1.0 / (4.0 * k);
    const int n = 2 * k - 1;
    double bound = n * std::pow(2.0, n) * std::pow(k * zeta, k);
    if (!(bound < 0.5))
        throw CertificateViolation("lower_bound_instance: closed-form bound " +
                                   std::to_string(bound) + " not below 1/2");
    double eps_cap = std::min(pi_min / (4.0 * std::sqrt(static_cast<double>(k))), zeta);
    if (eps <= 0.0) eps = 0.5 * eps_cap;
    MixtureModel model = near_singular_model(k, n, zeta);
    AdversarialPair pair = confusable_pair(model, {zeta, pi_min}, eps);
    if (!(pair.sigma <= bound + 1e-12))
        throw CertificateViolation("lower_bound_instance: measured sigma " +
                                   std::to_string(pair.sigma) +
                                   " exceeds the closed-form bound " + std::to_string(bound));
    return pair;
}

// Closed-form floor on the infinity-norm of the inverse Vandermonde of the
// nodes: max_i prod_{j != i} max(1, |x_j|) / |x_i - x_j|.
inline double vandermonde_inverse_norm_bound(const Vector& nodes) {
    const int k = static_cast<int>(nodes.size());
    if (k < 1) throw PreconditionFailed("vandermonde_inverse_norm_bound: need >= 1 node");
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (nodes[i] == nodes[j])
                throw PreconditionFailed("vandermonde_inverse_norm_bound: repeated node " +
                                         std::to_string(nodes[i]));
    double best = 0.0;
    for (int i = 0; i < k; ++i) {
        double prod = 1.0;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            prod *= std::max(1.0, std::abs(nodes[j])) / std::abs(nodes[i] - nodes[j]);
        }
        best = std::max(best, prod);
    }
    return best;
}

}  // namespace mixprod

#endif
