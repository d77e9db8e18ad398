#ifndef MIXPROD_ERRORS_HPP
#define MIXPROD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mixprod {

// Base class for every failure this library raises on purpose. Messages name
// the structural cause (what assumption broke), not just the operation.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input shapes or parameter values violate a documented precondition.
struct PreconditionFailed : Error {
    using Error::Error;
};

// The assembled pair matrix has numerical rank below k: the chosen subsets do
// not expose k distinguishable components.
struct RankDeficient : Error {
    RankDeficient(double ratio_, const std::string& msg) : Error(msg), ratio(ratio_) {}
    double ratio;  // sigma_k / sigma_1 of the assembled matrix
};

// The simultaneous-diagonalization pencil produced eigenvalues with imaginary
// parts beyond tolerance; the statistics are inconsistent with any real model
// at this noise level.
struct ComplexSpectrum : Error {
    using Error::Error;
};

// Two recovered anchor means are too close to pair eigenvectors safely
// (anchor observable not sufficiently separated across components).
struct EigenvalueCollision : Error {
    using Error::Error;
};

// The all-ones row normalization of an eigenvector column is degenerate.
struct NormalizationUnstable : Error {
    using Error::Error;
};

// A recovered mixing weight is too close to zero to divide by.
struct DegeneratePi : Error {
    using Error::Error;
};

// Linear system matrix is numerically singular.
struct NearSingular : Error {
    NearSingular(double ratio_, const std::string& msg) : Error(msg), ratio(ratio_) {}
    double ratio;  // sigma_k / sigma_1 of the system matrix
};

// Exhaustive subset search found no candidate partition that completed.
struct NoViableCandidate : Error {
    using Error::Error;
};

// A constructed certificate (an inequality the construction guarantees by
// design) failed when re-measured; indicates a bug or broken precondition.
struct CertificateViolation : Error {
    using Error::Error;
};

}  // namespace mixprod

#endif
