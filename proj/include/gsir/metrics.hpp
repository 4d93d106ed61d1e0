#pragma once

// Span-recovery scores for sufficient predictors.
//
// Generating functions are identifiable only up to invertible
// transformations, so both scores depend on column spans only.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gsir/errors.hpp"

namespace gsir::metrics {

using Eigen::Index;
using Eigen::MatrixXd;

/// Predictors are defined up to additive constants, so scoring centers
/// columns by default. `none` scores raw column spans.
enum class Centering { columns, none };

inline constexpr double kRankTolerance = 1e-10;

namespace detail {

/// Orthonormal basis of the (optionally centered) column span of `a`.
/// Throws if the block is rank deficient.
inline MatrixXd span_basis(const MatrixXd& a, Centering centering, const std::string& name) {
    if (a.cols() < 1) throw InputError("block " + name + " has no columns");
    MatrixXd c = a;
    if (centering == Centering::columns) c.rowwise() -= a.colwise().mean();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(c);
    const auto& r = qr.matrixR();
    const double lead = std::abs(r(0, 0));
    const Index k = a.cols();
    if (!(lead > 0.0) || std::abs(r(k - 1, k - 1)) <= kRankTolerance * lead)
        throw InputError("block " + name + " is rank deficient" +
                         (centering == Centering::columns ? std::string(" after centering") : std::string()));
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), k);
    return q;
}

inline void check_shapes(const MatrixXd& a, const MatrixXd& b) {
    if (a.rows() != b.rows())
        throw InputError("blocks differ in row count: " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
    if (a.rows() <= std::max(a.cols(), b.cols()))
        throw InputError("need more rows than columns in each block");
}

}  // namespace detail

/// Frobenius norm of P_A - P_B for the orthogonal projections onto the
/// column spans. Lies in [0, sqrt(d + d')].
inline double subspace_distance(const MatrixXd& a, const MatrixXd& b, Centering centering = Centering::columns) {
    detail::check_shapes(a, b);
    const MatrixXd qa = detail::span_basis(a, centering, "A");
    const MatrixXd qb = detail::span_basis(b, centering, "B");
    // |P_A - P_B|_F^2 = d + d' - 2 |Qa^T Qb|_F^2
    const double cross = (qa.transpose() * qb).squaredNorm();
    const double sq = static_cast<double>(a.cols() + b.cols()) - 2.0 * cross;
    return std::sqrt(std::max(sq, 0.0));
}

/// Largest canonical correlation between the two column spans.
inline double max_canonical_correlation(const MatrixXd& a, const MatrixXd& b,
                                        Centering centering = Centering::columns) {
    detail::check_shapes(a, b);
    const MatrixXd qa = detail::span_basis(a, centering, "A");
    const MatrixXd qb = detail::span_basis(b, centering, "B");
    Eigen::JacobiSVD<MatrixXd> svd(qa.transpose() * qb);
    return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

}  // namespace gsir::metrics
