#pragma once

// Sequence-space simulator with known population operators.
//
// Feature maps are represented by truncated Karhunen-Loeve coordinates:
// X-features zeta in R^J with var(zeta_j) = lambda_j = j^{-alpha}, and
// Y-features in R^Jy. The population regression operator is
// R = Lambda^beta S with |S|_op <= 1, so Sigma_XY = Lambda^{1+beta} S, and
// the Y-coordinates are generated as y = R^T zeta + u with E[u | zeta] = 0.
// Because everything is an explicit matrix, estimation errors in operator
// norm can be measured exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsir/errors.hpp"
#include "gsir/operator_algebra.hpp"
#include "gsir/random.hpp"

namespace gsir::sim {

enum class SKind { identity, random_orthogonal_scaled };
enum class ResidualKind { independent, heteroscedastic };

inline std::string to_string(SKind k) { return k == SKind::identity ? "identity" : "random_orthogonal_scaled"; }
inline std::string to_string(ResidualKind k) {
    return k == ResidualKind::independent ? "independent" : "heteroscedastic";
}
inline SKind s_kind_from_string(const std::string& s) {
    if (s == "identity") return SKind::identity;
    if (s == "random_orthogonal_scaled") return SKind::random_orthogonal_scaled;
    throw InputError("unknown s_kind '" + s + "'");
}
inline ResidualKind residual_kind_from_string(const std::string& s) {
    if (s == "independent") return ResidualKind::independent;
    if (s == "heteroscedastic") return ResidualKind::heteroscedastic;
    throw InputError("unknown residual_kind '" + s + "'");
}

/// lambda_j = j^{-alpha}, j = 1..J.
inline VectorXd power_law_spectrum(Index J, double alpha) {
    VectorXd l(J);
    for (Index j = 0; j < J; ++j) l(j) = std::pow(static_cast<double>(j + 1), -alpha);
    return l;
}

struct SpectralModel {
    Index J = 0;
    Index Jy = 0;
    double alpha = 2.0;
    double beta = 1.0;
    double alpha_u = 2.0;
    VectorXd lambdas;       // j^{-alpha}
    MatrixXd S;             // J x Jy, |S|_op <= 1
    MatrixXd R;             // Lambda^beta S
    MatrixXd Rprime;        // Lambda^{beta + 1/2} S
    VectorXd noise_scales;  // k^{-alpha_u}

    /// M = R R^T.
    MatrixXd M() const { return R * R.transpose(); }
    MatrixXd Mprime() const { return Rprime * Rprime.transpose(); }

    /// sum_{j > J} lambda_j as a fraction of sum_j lambda_j.
    double tail_fraction() const {
        const double total = std::riemann_zeta(alpha);
        return std::max(total - lambdas.sum(), 0.0) / total;
    }
};

inline SpectralModel build_model(Index J, Index Jy, double alpha, double beta, std::uint64_t seed,
                                 SKind s_kind, double alpha_u = 2.0) {
    if (J < 1 || Jy < 1) throw InputError("build_model: J and Jy must be >= 1");
    if (!(alpha > 1.0)) throw InputError("build_model: alpha must be > 1, got " + std::to_string(alpha));
    if (!(beta > 0.0)) throw InputError("build_model: beta must be > 0, got " + std::to_string(beta));
    if (!(alpha_u > 1.0)) throw InputError("build_model: alpha_u must be > 1");

    SpectralModel m;
    m.J = J;
    m.Jy = Jy;
    m.alpha = alpha;
    m.beta = beta;
    m.alpha_u = alpha_u;
    m.lambdas = power_law_spectrum(J, alpha);
    m.noise_scales.resize(Jy);
    for (Index k = 0; k < Jy; ++k) m.noise_scales(k) = std::pow(static_cast<double>(k + 1), -alpha_u);

    if (s_kind == SKind::identity) {
        m.S = MatrixXd::Identity(J, Jy);
    } else {
        Rng rng(seed);
        MatrixXd g(J, Jy);
        for (Index i = 0; i < J; ++i)
            for (Index k = 0; k < Jy; ++k) g(i, k) = rng.unit_uniform();
        m.S = g / operator_norm(g);
    }
    VectorXd lb(J), lbh(J);
    for (Index j = 0; j < J; ++j) {
        lb(j) = std::pow(m.lambdas(j), beta);
        lbh(j) = std::pow(m.lambdas(j), beta + 0.5);
    }
    m.R = lb.asDiagonal() * m.S;
    m.Rprime = lbh.asDiagonal() * m.S;
    return m;
}

struct SpectralSample {
    Index n = 0;
    MatrixXd Zx;  // n x J
    MatrixXd Zu;  // n x Jy
    MatrixXd Zy;  // Zx R + Zu
};

/// zeta_ij = sqrt(lambda_j) e_ij and w_ik iid uniform on [-sqrt 3, sqrt 3].
/// Independent residuals: u_ik = tau_k w_ik. Heteroscedastic residuals:
/// u_ik = tau_k w_ik (1 + e_i1) / 2, still conditionally mean zero.
inline SpectralSample simulate_sample(const SpectralModel& model, Index n, std::uint64_t seed,
                                      ResidualKind residual_kind) {
    if (n < 2) throw InputError("simulate_sample: n must be >= 2");
    SpectralSample s;
    s.n = n;
    s.Zx.resize(n, model.J);
    s.Zu.resize(n, model.Jy);
    const VectorXd sqrt_lambda = model.lambdas.cwiseSqrt();
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        double e1 = 0.0;
        for (Index j = 0; j < model.J; ++j) {
            const double e = rng.unit_uniform();
            if (j == 0) e1 = e;
            s.Zx(i, j) = sqrt_lambda(j) * e;
        }
        const double factor = residual_kind == ResidualKind::heteroscedastic ? 0.5 * (1.0 + e1) : 1.0;
        for (Index k = 0; k < model.Jy; ++k) s.Zu(i, k) = model.noise_scales(k) * rng.unit_uniform() * factor;
    }
    s.Zy = s.Zx * model.R + s.Zu;
    return s;
}

struct EmpiricalOperators {
    MatrixXd SxxHat;  // J x J
    MatrixXd SxyHat;  // J x Jy
    MatrixXd SxuHat;  // J x Jy
};

inline MatrixXd center_columns(const MatrixXd& z) {
    MatrixXd c = z;
    c.rowwise() -= z.colwise().mean();
    return c;
}

inline EmpiricalOperators empirical_operators(const SpectralSample& sample) {
    if (sample.n < 2) throw InputError("empirical_operators: n must be >= 2");
    const double n = static_cast<double>(sample.n);
    const MatrixXd zx = center_columns(sample.Zx);
    const MatrixXd zu = center_columns(sample.Zu);
    const MatrixXd zy = center_columns(sample.Zy);
    EmpiricalOperators ops;
    ops.SxxHat.noalias() = zx.transpose() * zx / n;
    ops.SxxHat = symmetrize(ops.SxxHat);
    ops.SxyHat.noalias() = zx.transpose() * zy / n;
    ops.SxuHat.noalias() = zx.transpose() * zu / n;
    return ops;
}

struct RegressionEstimates {
    EmpiricalOperators empirical;
    PsdSpectrum sxx_spectrum;
    double epsilon = 0.0;
    MatrixXd R1hat;      // (SxxHat + eps I)^{-1} SxyHat
    MatrixXd R2hat;      // (SxxHat + eps I)^{-1/2} SxyHat
    MatrixXd Mhat;       // R1hat R1hat^T
    MatrixXd MhatPrime;  // R2hat R2hat^T
};

inline RegressionEstimates estimate_regression_ops(const EmpiricalOperators& ops, double epsilon) {
    if (!(epsilon > 0.0)) throw InputError("estimate_regression_ops: epsilon must be > 0");
    RegressionEstimates est;
    est.empirical = ops;
    est.epsilon = epsilon;
    est.sxx_spectrum = decompose_psd(ops.SxxHat);
    est.R1hat = spectral_apply(est.sxx_spectrum, SpectralFn::inv_shift(epsilon)) * ops.SxyHat;
    est.R2hat = spectral_apply(est.sxx_spectrum, SpectralFn::inv_sqrt_shift(epsilon)) * ops.SxyHat;
    est.Mhat = symmetrize(est.R1hat * est.R1hat.transpose());
    est.MhatPrime = symmetrize(est.R2hat * est.R2hat.transpose());
    return est;
}

inline RegressionEstimates estimate_regression_ops(const SpectralSample& sample, double epsilon) {
    return estimate_regression_ops(empirical_operators(sample), epsilon);
}

/// Per-sample estimation errors against the population model.
struct ErrorRecord {
    double err_r1 = 0.0;       // |R1hat - R|_op
    double err_r2 = 0.0;       // |R2hat - R'|_op
    double err_m = 0.0;        // |Mhat - M|_op
    double err_m_prime = 0.0;  // |Mhat' - M'|_op
    int d = 0;                 // rank of R
    std::vector<double> proj_errors;  // |P_hat_j - P_j|_op, j = 1..d
    std::vector<double> eigvec_errors;  // |phi_hat_j - s_j phi_j|, sign aligned
    std::vector<double> eta_errors;     // |eta_hat_j - s'_j eta_j|, eta_j = Lambda^{-1/2} psi_j
    std::vector<double> gaps;         // delta_j of the population spectrum of M
    std::vector<std::optional<bool>> bound_ok;  // |P_hat_j - P_j| <= 4 |Mhat - M| / delta_j; empty if delta_j = 0
    double gsir1_span_error = 0.0;  // |P(span phi_hat_1..d) - P(ran R)|_op
    double gsir2_span_error = 0.0;  // |P(span eta_hat_1..d) - P(ran R)|_op, eta_hat_j = (Sxx+eps)^{-1/2} psi_hat_j
};

namespace detail {

/// |P_A - P_B|_op for orthonormal bases of equal dimension: sine of the
/// largest principal angle.
inline double projector_distance(const MatrixXd& qa, const MatrixXd& qb) {
    const MatrixXd cross = qa.transpose() * qb;
    Eigen::JacobiSVD<MatrixXd> svd(cross);
    const double smin = svd.singularValues().size() > 0 ? svd.singularValues().minCoeff() : 0.0;
    return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, smin) * std::min(1.0, smin)));
}

inline MatrixXd orthonormal_basis(const MatrixXd& a) {
    Eigen::HouseholderQR<MatrixXd> qr(a);
    return qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
}

inline Index numerical_rank(const MatrixXd& a, double rel = 1e-10) {
    Eigen::JacobiSVD<MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel * sv(0)) ++r;
    return r;
}

}  // namespace detail

inline ErrorRecord error_report(const SpectralModel& model, const RegressionEstimates& est) {
    if (est.R1hat.rows() != model.R.rows() || est.R1hat.cols() != model.R.cols())
        throw InputError("error_report: estimates do not match the model dimensions");
    ErrorRecord rec;
    const MatrixXd m = model.M();
    rec.err_r1 = operator_norm(est.R1hat - model.R);
    rec.err_r2 = operator_norm(est.R2hat - model.Rprime);
    rec.err_m = operator_norm(est.Mhat - m);
    rec.err_m_prime = operator_norm(est.MhatPrime - model.Mprime());

    const Index d = detail::numerical_rank(model.R);
    rec.d = static_cast<int>(d);
    if (d == 0) return rec;

    const PsdSpectrum pop = symmetric_eigen(m);
    const PsdSpectrum hat = symmetric_eigen(est.Mhat);
    const PsdSpectrum hat_prime = symmetric_eigen(est.MhatPrime);
    const auto mu = [&](Index j) { return j < pop.size() ? std::max(pop.values(j), 0.0) : 0.0; };

    for (Index j = 0; j < d; ++j) {
        const VectorXd v = pop.vectors.col(j);
        const VectorXd vh = hat.vectors.col(j);
        // For unit vectors, |vh vh^T - v v^T|_op = sqrt(1 - <vh, v>^2).
        const double c = std::min(1.0, std::abs(vh.dot(v)));
        rec.proj_errors.push_back(std::sqrt(std::max(0.0, 1.0 - c * c)));
        rec.eigvec_errors.push_back((vh - static_cast<double>(vh.dot(v) < 0.0 ? -1 : 1) * v).norm());

        const double upper = j == 0 ? std::numeric_limits<double>::infinity() : mu(j - 1) - mu(j);
        const double gap = std::min(upper, mu(j) - mu(j + 1));
        rec.gaps.push_back(gap);
        if (gap > 0.0)
            rec.bound_ok.emplace_back(rec.proj_errors.back() <= 4.0 * rec.err_m / gap);
        else
            rec.bound_ok.emplace_back(std::nullopt);
    }

    const MatrixXd range_r = pop.vectors.leftCols(d);
    rec.gsir1_span_error = detail::projector_distance(hat.vectors.leftCols(d), range_r);
    const MatrixXd eta_hat = spectral_apply(est.sxx_spectrum, SpectralFn::inv_sqrt_shift(est.epsilon)) *
                             hat_prime.vectors.leftCols(d);
    rec.gsir2_span_error = detail::projector_distance(detail::orthonormal_basis(eta_hat), range_r);

    const PsdSpectrum pop_prime = symmetric_eigen(model.Mprime());
    const VectorXd inv_sqrt_lambda = model.lambdas.cwiseSqrt().cwiseInverse();
    for (Index j = 0; j < d; ++j) {
        const VectorXd psi = pop_prime.vectors.col(j);
        const double sign = hat_prime.vectors.col(j).dot(psi) < 0.0 ? -1.0 : 1.0;
        const VectorXd eta = inv_sqrt_lambda.asDiagonal() * psi;
        rec.eta_errors.push_back((eta_hat.col(j) - sign * eta).norm());
    }
    return rec;
}

/// sum_j lambda_j / (lambda_j + eps).
inline double lemma_alpha_sum(const VectorXd& lambdas, double epsilon) {
    if (!(epsilon > 0.0)) throw InputError("lemma_alpha_sum: epsilon must be > 0");
    double s = 0.0;
    for (Index j = 0; j < lambdas.size(); ++j) s += lambdas(j) / (lambdas(j) + epsilon);
    return s;
}

}  // namespace gsir::sim
