#pragma once

// Sample-level GSIR-I and GSIR-II.
//
// Estimated functions live in span{psi_i}, psi_i = k_X(., X_i) - mean
// feature. A function f = sum_i c_i psi_i is stored by its coefficient
// vector c; then <f, g>_H = c^T G_X c', the empirical covariance operator acts
// on coefficients as G_X / n, and the cross-covariance maps Y-coefficients b
// to X-coefficients G_Y b / n.
//
// With T = G_X / n + eps I and W = G_X^{1/2}, the substitution u = W c turns
// "maximize <f, M f> subject to <f, f> = 1" into a standard symmetric
// eigenproblem
//   GSIR-I:  S  = B W G_Y W B / n^2,              B = T^{-1}
//   GSIR-II: S' = T^{-1/2} W G_Y W T^{-1/2} / n^2
// and c = W^+ u. All of T^{-1}, T^{-1/2}, W and W^+ are functions of G_X, so
// they are diagonal in its eigenbasis. The solver works in the eigenbasis of
// G_X restricted to its numerical range (eigenvalues above
// kDefaultPinvClamp * lambda_max), which keeps every u in ran(W).

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsir/errors.hpp"
#include "gsir/kernel.hpp"
#include "gsir/operator_algebra.hpp"

namespace gsir {

enum class GsirVariant { gsir1, gsir2 };

inline std::string to_string(GsirVariant v) { return v == GsirVariant::gsir1 ? "GSIR_I" : "GSIR_II"; }

inline GsirVariant gsir_variant_from_string(const std::string& s) {
    if (s == "GSIR_I") return GsirVariant::gsir1;
    if (s == "GSIR_II") return GsirVariant::gsir2;
    throw InputError("unknown GSIR variant '" + s + "' (expected GSIR_I or GSIR_II)");
}

inline constexpr double kEigenGapWarning = 1e-10;

/// Fitted sufficient predictors.
///
/// Column j of `coefficients` expands the j-th predictor over the centered
/// training features. For GSIR-I these are the eigenfunctions phi_j, with
/// C^T G_X C = I. For GSIR-II they are eta_j = (Sigma_XX + eps I)^{-1/2} psi_j,
/// where the psi_j are G_X-orthonormal eigenfunctions of M'.
struct GsirFit {
    GsirVariant variant = GsirVariant::gsir1;
    MatrixXd train_points;
    KernelSpec kernel_x;
    KernelSpec kernel_y;
    double epsilon = 0.0;
    int d = 0;
    MatrixXd coefficients;  // n x d
    VectorXd eigenvalues;   // length d, nonincreasing
    std::vector<std::string> warnings;
};

/// Centered Grams and the G_X eigendecomposition for one training sample.
/// Both variants and any number of epsilons can be solved from it.
class GsirProblem {
public:
    GsirProblem(const MatrixXd& x, const MatrixXd& y, KernelSpec kx, KernelSpec ky)
        : x_(x), kx_(kx), ky_(ky) {
        if (x.rows() != y.rows())
            throw InputError("X and Y differ in sample count: " + std::to_string(x.rows()) + " vs " +
                             std::to_string(y.rows()));
        if (x.rows() < 3) throw InputError("GSIR needs n >= 3 samples");
        kx_.validate();
        ky_.validate();
        gx_ = centered_gram(kx_, x);
        gy_ = centered_gram(ky_, y);
        spectrum_x_ = decompose_psd(gx_.G, 1e-8);
        rank_x_ = spectrum_x_.numerical_rank(kDefaultPinvClamp);
    }

    Index n() const { return gx_.n; }
    Index rank() const { return rank_x_; }
    const GramBundle& gram_x() const { return gx_; }
    const GramBundle& gram_y() const { return gy_; }
    const PsdSpectrum& spectrum_x() const { return spectrum_x_; }

    /// The full n x n symmetrized operator S (GSIR-I) or S' (GSIR-II),
    /// assembled through spectral_apply. The solver uses the equivalent
    /// reduced form; this is exposed for inspection and tests.
    MatrixXd operator_matrix(GsirVariant variant, double epsilon) const {
        check_epsilon(epsilon);
        const double nn = static_cast<double>(n());
        const PsdSpectrum t = scaled_spectrum();
        const MatrixXd left = variant == GsirVariant::gsir1 ? spectral_apply(t, SpectralFn::inv_shift(epsilon))
                                                            : spectral_apply(t, SpectralFn::inv_sqrt_shift(epsilon));
        const MatrixXd w = spectral_apply(spectrum_x_, SpectralFn::sqrt());
        const MatrixXd lw = left * w;
        return symmetrize(lw * gy_.G * lw.transpose() / (nn * nn));
    }

    GsirFit solve(GsirVariant variant, double epsilon, int d) const {
        check_epsilon(epsilon);
        if (d < 1 || d > n() - 1)
            throw InputError("d must satisfy 1 <= d <= n-1; got d=" + std::to_string(d) + " with n=" +
                             std::to_string(n()));
        if (d > rank_x_)
            throw InputError("d=" + std::to_string(d) + " exceeds the numerical rank of G_X; achievable d <= " +
                             std::to_string(rank_x_));

        const Index r = rank_x_;
        const double nn = static_cast<double>(n());
        const MatrixXd vr = spectrum_x_.vectors.leftCols(r);
        const VectorXd g = spectrum_x_.values.head(r);

        // Diagonal of (left factor) * W in the G_X eigenbasis.
        VectorXd left(r);
        for (Index i = 0; i < r; ++i) {
            const double t = g(i) / nn + epsilon;
            left(i) = variant == GsirVariant::gsir1 ? 1.0 / t : 1.0 / std::sqrt(t);
        }
        const VectorXd scale = left.cwiseProduct(g.cwiseSqrt());
        MatrixXd reduced = scale.asDiagonal() * (vr.transpose() * gy_.G * vr) * scale.asDiagonal();
        reduced = symmetrize(reduced / (nn * nn));
        const PsdSpectrum eig = symmetric_eigen(reduced);

        GsirFit fit;
        fit.variant = variant;
        fit.train_points = x_;
        fit.kernel_x = kx_;
        fit.kernel_y = ky_;
        fit.epsilon = epsilon;
        fit.d = d;
        fit.eigenvalues = eig.values.head(d);

        // c = W^+ u with u = V_r z, i.e. c = V_r diag(g^{-1/2}) z; then
        // c^T G_X c = z^T z = 1 exactly, up to rounding which is removed below.
        MatrixXd coeffs = vr * g.cwiseSqrt().cwiseInverse().asDiagonal() * eig.vectors.leftCols(d);
        for (Index j = 0; j < d; ++j) {
            const double norm2 = coeffs.col(j).dot(gx_.G * coeffs.col(j));
            if (!(norm2 > 0.0) || !std::isfinite(norm2))
                throw NumericalError("predictor " + std::to_string(j + 1) + " has zero RKHS norm");
            coeffs.col(j) /= std::sqrt(norm2);
        }
        if (variant == GsirVariant::gsir2) {
            // eta_j = (Sigma_XX + eps I)^{-1/2} psi_j
            VectorXd inv_sqrt_t(r);
            for (Index i = 0; i < r; ++i) inv_sqrt_t(i) = 1.0 / std::sqrt(g(i) / nn + epsilon);
            coeffs = vr * inv_sqrt_t.asDiagonal() * (vr.transpose() * coeffs);
        }
        fit.coefficients = std::move(coeffs);

        const double next = d < r ? eig.values(d) : 0.0;
        if (eig.values(d - 1) - next < kEigenGapWarning) {
            std::ostringstream msg;
            msg << "eigenvalue gap mu_d - mu_{d+1} = " << (eig.values(d - 1) - next)
                << " is below " << kEigenGapWarning << "; predictor " << d << " is not uniquely determined";
            fit.warnings.push_back(msg.str());
        }
        for (Index j = 0; j < d; ++j) fit.eigenvalues(j) = std::max(fit.eigenvalues(j), 0.0);
        return fit;
    }

private:
    static void check_epsilon(double epsilon) {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw InputError("epsilon must be > 0, got " + std::to_string(epsilon));
    }

    // Spectrum of G_X / n, sharing eigenvectors with G_X.
    PsdSpectrum scaled_spectrum() const {
        PsdSpectrum t = spectrum_x_;
        t.values /= static_cast<double>(n());
        return t;
    }

    MatrixXd x_;
    KernelSpec kx_;
    KernelSpec ky_;
    GramBundle gx_;
    GramBundle gy_;
    PsdSpectrum spectrum_x_;
    Index rank_x_ = 0;
};

inline GsirFit fit_gsir1(const MatrixXd& x, const MatrixXd& y, const KernelSpec& kx, const KernelSpec& ky,
                         double epsilon, int d) {
    return GsirProblem(x, y, kx, ky).solve(GsirVariant::gsir1, epsilon, d);
}

inline GsirFit fit_gsir2(const MatrixXd& x, const MatrixXd& y, const KernelSpec& kx, const KernelSpec& ky,
                         double epsilon, int d) {
    return GsirProblem(x, y, kx, ky).solve(GsirVariant::gsir2, epsilon, d);
}

inline GsirFit fit_gsir(GsirVariant variant, const MatrixXd& x, const MatrixXd& y, const KernelSpec& kx,
                        const KernelSpec& ky, double epsilon, int d) {
    return GsirProblem(x, y, kx, ky).solve(variant, epsilon, d);
}

/// Entry (m, j) is the j-th predictor evaluated at row m of `xnew`:
/// K_new Q C with (K_new)_{mi} = k_X(xnew_m, X_i).
inline MatrixXd evaluate_predictors(const GsirFit& fit, const MatrixXd& xnew) {
    if (xnew.cols() != fit.train_points.cols())
        throw InputError("evaluation points have " + std::to_string(xnew.cols()) + " columns, model expects " +
                         std::to_string(fit.train_points.cols()));
    const MatrixXd k_new = cross_gram(fit.kernel_x, xnew, fit.train_points);
    // Q C = C - 1 (column means of C)
    MatrixXd qc = fit.coefficients;
    qc.rowwise() -= fit.coefficients.colwise().mean();
    return k_new * qc;
}

/// Sign of <estimated, reference>; a zero inner product maps to +1.
inline int align_sign(const VectorXd& estimated, const VectorXd& reference) {
    if (estimated.size() != reference.size()) throw InputError("align_sign: length mismatch");
    if (estimated.squaredNorm() == 0.0 || reference.squaredNorm() == 0.0)
        throw InputError("align_sign: zero vector");
    return estimated.dot(reference) < 0.0 ? -1 : 1;
}

}  // namespace gsir
