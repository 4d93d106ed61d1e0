#pragma once

// Spectral functional calculus on symmetric positive semidefinite matrices.
//
// Every matrix function in the library goes through one symmetric
// eigendecomposition M = V diag(d) V^T. Slightly negative eigenvalues that
// survive the PSD check are clamped to zero before a function is applied.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gsir/errors.hpp"

namespace gsir {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kDefaultPinvClamp = 1e-12;

/// Scalar function applied to the spectrum of a PSD matrix.
struct SpectralFn {
    enum class Kind { inv_shift, inv_sqrt_shift, sqrt, pinv_sqrt };

    Kind kind = Kind::sqrt;
    double param = 0.0;  // epsilon for the shifted kinds, relative clamp for pinv_sqrt

    static SpectralFn inv_shift(double epsilon) { return checked({Kind::inv_shift, epsilon}); }
    static SpectralFn inv_sqrt_shift(double epsilon) { return checked({Kind::inv_sqrt_shift, epsilon}); }
    static SpectralFn sqrt() { return {Kind::sqrt, 0.0}; }
    static SpectralFn pinv_sqrt(double clamp = kDefaultPinvClamp) { return checked({Kind::pinv_sqrt, clamp}); }

    /// Value at eigenvalue d >= 0; lambda_max is the largest eigenvalue of the matrix.
    double operator()(double d, double lambda_max) const {
        switch (kind) {
            case Kind::inv_shift: return 1.0 / (d + param);
            case Kind::inv_sqrt_shift: return 1.0 / std::sqrt(d + param);
            case Kind::sqrt: return std::sqrt(d);
            case Kind::pinv_sqrt: return d > param * lambda_max && d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
        }
        return 0.0;
    }

private:
    static SpectralFn checked(SpectralFn f) {
        if (f.kind == Kind::pinv_sqrt) {
            if (!(f.param >= 0.0)) throw InputError("pinv_sqrt clamp must be >= 0");
        } else if (!(f.param > 0.0) || !std::isfinite(f.param)) {
            throw InputError("spectral shift epsilon must be > 0, got " + std::to_string(f.param));
        }
        return f;
    }
};

/// (A + A^T) / 2.
inline MatrixXd symmetrize(const MatrixXd& a) {
    MatrixXd s = 0.5 * (a + a.transpose());
    return s;
}

/// Symmetric eigendecomposition, eigenvalues in descending order. When
/// produced by decompose_psd the values are also clamped at zero.
struct PsdSpectrum {
    VectorXd values;   // descending
    MatrixXd vectors;  // columns are orthonormal eigenvectors

    Index size() const { return values.size(); }
    double lambda_max() const { return values.size() > 0 ? std::max(values(0), 0.0) : 0.0; }

    /// Number of eigenvalues above clamp * lambda_max.
    Index numerical_rank(double clamp = kDefaultPinvClamp) const {
        const double cut = clamp * lambda_max();
        Index r = 0;
        for (Index i = 0; i < values.size(); ++i)
            if (values(i) > cut && values(i) > 0.0) ++r;
        return r;
    }
};

/// Symmetric eigendecomposition without PSD validation; descending order.
inline PsdSpectrum symmetric_eigen(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    PsdSpectrum out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

/// Validates symmetry (1e-8 relative, Frobenius) and PSD-ness (eigenvalues
/// >= -1e-8 * largest |eigenvalue|), then clamps the spectrum at zero.
inline PsdSpectrum decompose_psd(const MatrixXd& m, double tolerance = 1e-8) {
    if (m.rows() != m.cols()) throw InputError("spectral calculus needs a square matrix");
    if (!m.allFinite()) throw InputError("matrix has non-finite entries");
    const double scale = m.norm();
    if ((m - m.transpose()).norm() > tolerance * scale)
        throw InputError("matrix is not symmetric within tolerance");
    PsdSpectrum s = symmetric_eigen(symmetrize(m));
    if (s.size() == 0) return s;
    const double magnitude = std::max(std::abs(s.values(0)), std::abs(s.values(s.size() - 1)));
    if (s.values(s.size() - 1) < -tolerance * magnitude)
        throw InputError("matrix has a negative eigenvalue beyond tolerance: " +
                         std::to_string(s.values(s.size() - 1)));
    s.values = s.values.cwiseMax(0.0);
    return s;
}

/// V f(D) V^T for a precomputed spectrum.
inline MatrixXd spectral_apply(const PsdSpectrum& spectrum, const SpectralFn& f) {
    const double lmax = spectrum.lambda_max();
    VectorXd fd(spectrum.size());
    for (Index i = 0; i < spectrum.size(); ++i) fd(i) = f(spectrum.values(i), lmax);
    MatrixXd out = spectrum.vectors * fd.asDiagonal() * spectrum.vectors.transpose();
    return symmetrize(out);
}

inline MatrixXd spectral_apply(const MatrixXd& m, const SpectralFn& f) {
    return spectral_apply(decompose_psd(m), f);
}

/// Largest singular value.
inline double operator_norm(const MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    if (!a.allFinite()) throw InputError("operator_norm: non-finite entries");
    Eigen::BDCSVD<MatrixXd> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace gsir
