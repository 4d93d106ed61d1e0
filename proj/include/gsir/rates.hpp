#pragma once

// Closed-form convergence-rate theory and empirical log-log slope fitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "gsir/errors.hpp"

namespace gsir::rates {

enum class Branch { smooth, rough };

inline std::string to_string(Branch b) { return b == Branch::smooth ? "smooth" : "rough"; }

/// Optimal tuning exponent delta (eps_n ~ n^{-delta}) and the resulting rate
/// exponent rho (error ~ n^{-rho}) for eigenvalue decay alpha and smoothness beta.
struct RateTheory {
    double alpha = 0.0;
    double beta = 0.0;
    double delta_opt = 0.0;
    double exponent_opt = 0.0;
    Branch branch = Branch::smooth;
};

/// beta above (alpha-1)/(2 alpha): delta = alpha / (2 alpha b + alpha + 1),
/// rho = alpha b / (2 alpha b + alpha + 1) with b = min(beta, 1).
/// Otherwise delta = 1/2 and rho = beta / 2.
inline RateTheory optimal_rate_theory(double alpha, double beta) {
    if (!(alpha > 1.0)) throw InputError("optimal_rate_theory: alpha must be > 1, got " + std::to_string(alpha));
    if (!(beta > 0.0)) throw InputError("optimal_rate_theory: beta must be > 0, got " + std::to_string(beta));
    RateTheory t;
    t.alpha = alpha;
    t.beta = beta;
    const double threshold = (alpha - 1.0) / (2.0 * alpha);
    if (beta > threshold) {
        const double b = std::min(beta, 1.0);
        const double denom = 2.0 * alpha * b + alpha + 1.0;
        t.branch = Branch::smooth;
        t.delta_opt = alpha / denom;
        t.exponent_opt = alpha * b / denom;
    } else {
        t.branch = Branch::rough;
        t.delta_opt = 0.5;
        t.exponent_opt = beta / 2.0;
    }
    return t;
}

/// Smooth-branch formulas evaluated regardless of the branch condition.
/// Used to check continuity at the branch boundary.
inline RateTheory smooth_branch_formula(double alpha, double beta) {
    RateTheory t;
    t.alpha = alpha;
    t.beta = beta;
    const double b = std::min(beta, 1.0);
    const double denom = 2.0 * alpha * b + alpha + 1.0;
    t.delta_opt = alpha / denom;
    t.exponent_opt = alpha * b / denom;
    return t;
}

enum class BoundVariant { gsir1, gsir2, legacy };

struct BoundTerms {
    std::array<double, 4> terms{};
    double sum = 0.0;
};

/// Terms of the error bound at sample size n and regularization eps.
///
/// gsir1: n^{-1/2} eps^{b-1}, eps^b, n^{-1} eps^{-(3a+1)/(2a)}, n^{-1/2} eps^{-(a+1)/(2a)}, b = min(beta, 1)
/// gsir2: same first two terms with beta + 1/2 in place of beta, then
///        n^{-1} eps^{-1-1/(2a)}, n^{-1/2} eps^{-1/(2a)}
/// legacy: eps^b and eps^{-1} n^{-1/2} (last two slots zero), the earlier
///         rate used as a reference curve.
inline BoundTerms rate_bound_terms(double n, double epsilon, double alpha, double beta, BoundVariant variant) {
    if (!(n >= 1.0)) throw InputError("rate_bound_terms: n must be >= 1");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InputError("rate_bound_terms: epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    if (!(alpha > 1.0)) throw InputError("rate_bound_terms: alpha must be > 1");
    if (!(beta > 0.0)) throw InputError("rate_bound_terms: beta must be > 0");

    const double inv_sqrt_n = 1.0 / std::sqrt(n);
    BoundTerms out;
    switch (variant) {
        case BoundVariant::gsir1: {
            const double b = std::min(beta, 1.0);
            out.terms = {inv_sqrt_n * std::pow(epsilon, b - 1.0), std::pow(epsilon, b),
                         std::pow(epsilon, -(3.0 * alpha + 1.0) / (2.0 * alpha)) / n,
                         inv_sqrt_n * std::pow(epsilon, -(alpha + 1.0) / (2.0 * alpha))};
            break;
        }
        case BoundVariant::gsir2: {
            const double b = std::min(beta + 0.5, 1.0);
            out.terms = {inv_sqrt_n * std::pow(epsilon, b - 1.0), std::pow(epsilon, b),
                         std::pow(epsilon, -1.0 - 1.0 / (2.0 * alpha)) / n,
                         inv_sqrt_n * std::pow(epsilon, -1.0 / (2.0 * alpha))};
            break;
        }
        case BoundVariant::legacy: {
            const double b = std::min(beta, 1.0);
            out.terms = {std::pow(epsilon, b), inv_sqrt_n / epsilon, 0.0, 0.0};
            break;
        }
    }
    out.sum = std::accumulate(out.terms.begin(), out.terms.end(), 0.0);
    return out;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// OLS of log(error) on log(n). r^2 is 1 when the errors are constant
/// (zero residual variance).
inline SlopeFit fit_loglog_slope(const std::vector<double>& ns, const std::vector<double>& errors) {
    if (ns.size() != errors.size()) throw InputError("fit_loglog_slope: length mismatch");
    if (ns.size() < 3) throw InputError("fit_loglog_slope: need at least 3 points");
    const std::size_t m = ns.size();
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(ns[i] > 0.0)) throw InputError("fit_loglog_slope: sample sizes must be positive");
        if (!(errors[i] > 0.0)) throw InputError("fit_loglog_slope: errors must be positive");
        lx[i] = std::log(ns[i]);
        ly[i] = std::log(errors[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InputError("fit_loglog_slope: sample sizes must not all be equal");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

/// Median; the mean of the two middle elements for even sizes.
inline double median(std::vector<double> v) {
    if (v.empty()) throw InputError("median of empty sequence");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    return m;
}

}  // namespace gsir::rates
