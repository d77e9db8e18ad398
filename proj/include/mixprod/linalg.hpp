#ifndef MIXPROD_LINALG_HPP
#define MIXPROD_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"

namespace mixprod {

// Full SVD A = U * diag(sigma) * V^T with U: m x m, V: n x n, sigma
// nonincreasing. backward_error is the measured Frobenius norm of
// A - U Sigma V^T, an upper bound on the spectral-norm residual.
struct SvdResult {
    Matrix U;
    Vector sigma;
    Matrix V;
    double backward_error = 0.0;
};

namespace detail {

inline void require_finite(const Matrix& A, const char* who) {
    if (!A.allFinite()) throw PreconditionFailed(std::string(who) + ": non-finite entry");
}

inline double svd_residual(const Matrix& A, const Matrix& U, const Vector& sigma,
                           const Matrix& V) {
    Matrix R = A;
    for (int i = 0; i < sigma.size(); ++i)
        R.noalias() -= sigma[i] * U.col(i) * V.col(i).transpose();
    return R.norm();
}

}  // namespace detail

inline SvdResult svd(const Matrix& A) {
    detail::require_finite(A, "svd");
    Eigen::JacobiSVD<Matrix> dec(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult r{dec.matrixU(), dec.singularValues(), dec.matrixV(), 0.0};
    r.backward_error = detail::svd_residual(A, r.U, r.sigma, r.V);
    return r;
}

// Economy SVD (U: m x min, V: n x min); the variant safe for very tall inputs
// such as materialized moment extensions.
inline SvdResult svd_thin(const Matrix& A) {
    detail::require_finite(A, "svd");
    Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult r{dec.matrixU(), dec.singularValues(), dec.matrixV(), 0.0};
    r.backward_error = detail::svd_residual(A, r.U, r.sigma, r.V);
    return r;
}

inline Vector singular_values(const Matrix& A) {
    detail::require_finite(A, "singular_values");
    return Eigen::JacobiSVD<Matrix>(A).singularValues();
}

// k-th largest singular value, k 1-based.
inline double sigma_k(const Matrix& A, int k) {
    long mn = std::min(A.rows(), A.cols());
    if (k < 1 || k > mn)
        throw PreconditionFailed("sigma_k: k out of range 1..min(rows, cols)");
    return singular_values(A)[k - 1];
}

// Real eigendecomposition of a general square matrix. Eigenvalues sorted
// nonincreasing; eigenvector columns have unit 2-norm. max_imag_residual is
// the largest discarded imaginary magnitude (eigenvalues and vectors);
// max_defect the largest ||A v - lambda v|| over unit eigenvectors.
struct EigResult {
    Vector eigenvalues;
    Matrix eigenvectors;
    double max_imag_residual = 0.0;
    double max_defect = 0.0;
};

inline double operator_norm_estimate(const Matrix& A) {
    // sigma_1 for the small dense matrices used here.
    return A.size() == 0 ? 0.0 : singular_values(A)[0];
}

inline EigResult eig_real(const Matrix& A, double imag_tol) {
    detail::require_finite(A, "eig_real");
    if (A.rows() != A.cols()) throw PreconditionFailed("eig_real: matrix must be square");
    const int k = static_cast<int>(A.rows());
    Eigen::EigenSolver<Matrix> dec(A);
    if (dec.info() != Eigen::Success) throw Error("eig_real: iteration failed to converge");

    double imag_res = 0.0;
    for (int j = 0; j < k; ++j) {
        imag_res = std::max(imag_res, std::abs(dec.eigenvalues()[j].imag()));
        imag_res = std::max(imag_res, dec.eigenvectors().col(j).imag().cwiseAbs().maxCoeff());
    }
    if (imag_res > imag_tol) {
        throw ComplexSpectrum("eig_real: imaginary residual " + std::to_string(imag_res) +
                              " exceeds tolerance " + std::to_string(imag_tol) +
                              " (spectrum not real at this noise level)");
    }

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dec.eigenvalues()[a].real() > dec.eigenvalues()[b].real();
    });

    EigResult r;
    r.eigenvalues.resize(k);
    r.eigenvectors.resize(k, k);
    r.max_imag_residual = imag_res;
    for (int j = 0; j < k; ++j) {
        r.eigenvalues[j] = dec.eigenvalues()[order[j]].real();
        Vector v = dec.eigenvectors().col(order[j]).real();
        double nrm = v.norm();
        if (nrm == 0.0) throw Error("eig_real: eigenvector with zero real part");
        r.eigenvectors.col(j) = v / nrm;
        r.max_defect = std::max(
            r.max_defect, (A * r.eigenvectors.col(j) - r.eigenvalues[j] * r.eigenvectors.col(j)).norm());
    }
    return r;
}

// Default imaginary tolerance: 1e-6 * ||A||.
inline EigResult eig_real(const Matrix& A) {
    return eig_real(A, 1e-6 * operator_norm_estimate(A));
}

// Solves the square system A x = b through the SVD. Refuses systems with
// sigma_k <= 1e-13 * sigma_1 so the forward-error contract stays meaningful.
inline Vector solve(const Matrix& A, const Vector& b) {
    detail::require_finite(A, "solve");
    if (A.rows() != A.cols()) throw PreconditionFailed("solve: matrix must be square");
    if (b.size() != A.rows()) throw PreconditionFailed("solve: rhs length mismatch");
    if (!b.allFinite()) throw PreconditionFailed("solve: non-finite rhs entry");
    Eigen::JacobiSVD<Matrix> dec(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = dec.singularValues();
    const int k = static_cast<int>(s.size());
    double ratio = k == 0 || s[0] == 0.0 ? 0.0 : s[k - 1] / s[0];
    if (k == 0 || s[k - 1] <= 1e-13 * s[0])
        throw NearSingular(ratio, "solve: sigma_k/sigma_1 = " + std::to_string(ratio) +
                                      " <= 1e-13, system numerically singular");
    Vector t = dec.matrixU().transpose() * b;
    for (int i = 0; i < k; ++i) t[i] /= s[i];
    return dec.matrixV() * t;
}

}  // namespace mixprod

#endif
