#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gsir/errors.hpp"
#include "gsir/rates.hpp"

using namespace gsir;
using namespace gsir::rates;

TEST(OptimalRate, SmoothBranchExample) {
    const RateTheory t = optimal_rate_theory(3.0, 1.0);
    EXPECT_EQ(t.branch, Branch::smooth);
    EXPECT_NEAR(t.delta_opt, 0.3, 1e-15);
    EXPECT_NEAR(t.exponent_opt, 0.3, 1e-15);
}

TEST(OptimalRate, RoughBranchExample) {
    const RateTheory t = optimal_rate_theory(2.0, 0.2);
    EXPECT_EQ(t.branch, Branch::rough);
    EXPECT_EQ(t.delta_opt, 0.5);
    EXPECT_NEAR(t.exponent_opt, 0.1, 1e-15);
}

TEST(OptimalRate, LargeAlphaApproachesOneThird) {
    EXPECT_NEAR(optimal_rate_theory(50.0, 1.0).exponent_opt, 50.0 / 151.0, 1e-15);
    EXPECT_NEAR(optimal_rate_theory(1e6, 1.0).exponent_opt, 1.0 / 3.0, 1e-5);
    EXPECT_LT(optimal_rate_theory(1e6, 1.0).exponent_opt, 1.0 / 3.0);
}

TEST(OptimalRate, InvalidInputs) {
    EXPECT_THROW(optimal_rate_theory(1.0, 1.0), InputError);
    EXPECT_THROW(optimal_rate_theory(0.5, 1.0), InputError);
    EXPECT_THROW(optimal_rate_theory(2.0, 0.0), InputError);
}

TEST(OptimalRate, BranchContinuity) {
    for (double alpha : {1.5, 2.0, 3.0, 5.0, 10.0, 100.0}) {
        const double beta = (alpha - 1.0) / (2.0 * alpha);
        const RateTheory rough = optimal_rate_theory(alpha, beta);
        const RateTheory smooth = smooth_branch_formula(alpha, beta);
        EXPECT_EQ(rough.branch, Branch::rough);
        EXPECT_NEAR(smooth.delta_opt, 0.5, 1e-12);
        EXPECT_NEAR(smooth.exponent_opt, beta / 2.0, 1e-12);
        EXPECT_NEAR(rough.delta_opt, smooth.delta_opt, 1e-12);
        EXPECT_NEAR(rough.exponent_opt, smooth.exponent_opt, 1e-12);
    }
}

TEST(OptimalRate, ExponentBoundsAndMonotonicity) {
    for (double alpha : {1.01, 1.5, 2.0, 4.0, 9.0, 30.0}) {
        double prev = 0.0;
        for (double beta = 0.05; beta <= 1.5; beta += 0.05) {
            const double e = optimal_rate_theory(alpha, beta).exponent_opt;
            EXPECT_GT(e, 0.0);
            EXPECT_LT(e, 0.5);
            EXPECT_LT(e, 1.0 / 3.0 + 1e-12);
            EXPECT_GE(e, prev - 1e-15);
            prev = e;
            if (beta >= 1.0) {
                EXPECT_GT(e, 0.25);
            }
        }
    }
    for (double beta : {0.1, 0.3, 0.6, 1.0}) {
        double prev = 0.0;
        for (double alpha = 1.1; alpha < 50.0; alpha *= 1.3) {
            const double e = optimal_rate_theory(alpha, beta).exponent_opt;
            EXPECT_GE(e, prev - 1e-15);
            prev = e;
        }
    }
}

TEST(BoundTerms, GsirOneExample) {
    const BoundTerms b = rate_bound_terms(1e4, 0.01, 2.0, 1.0, BoundVariant::gsir1);
    EXPECT_NEAR(b.terms[0], 0.01, 1e-15);
    EXPECT_NEAR(b.terms[1], 0.01, 1e-15);
    EXPECT_NEAR(b.terms[2], 0.31623, 1e-5);
    EXPECT_NEAR(b.terms[3], 0.31623, 1e-5);
    EXPECT_NEAR(b.sum, 0.65246, 1e-5);
}

TEST(BoundTerms, GsirTwoSharesLeadingTermsWhenSmooth) {
    for (double beta : {1.0, 1.5, 3.0}) {
        const BoundTerms a = rate_bound_terms(5000, 0.03, 2.5, beta, BoundVariant::gsir1);
        const BoundTerms b = rate_bound_terms(5000, 0.03, 2.5, beta, BoundVariant::gsir2);
        EXPECT_EQ(a.terms[0], b.terms[0]);
        EXPECT_EQ(a.terms[1], b.terms[1]);
    }
    const BoundTerms b = rate_bound_terms(1e4, 0.01, 2.0, 0.2, BoundVariant::gsir2);
    EXPECT_NEAR(b.terms[0], 1e-2 * std::pow(0.01, -0.3), 1e-15);
    EXPECT_NEAR(b.terms[2], 1e-4 * std::pow(0.01, -1.25), 1e-15);
    EXPECT_NEAR(b.terms[3], 1e-2 * std::pow(0.01, -0.25), 1e-15);
}

TEST(BoundTerms, Legacy) {
    const BoundTerms b = rate_bound_terms(1e4, 0.01, 2.0, 1.0, BoundVariant::legacy);
    EXPECT_NEAR(b.sum, 0.01 + 1.0, 1e-14);
}

TEST(BoundTerms, MonotoneInN) {
    for (BoundVariant v : {BoundVariant::gsir1, BoundVariant::gsir2}) {
        const BoundTerms a = rate_bound_terms(1000, 0.05, 2.0, 0.6, v);
        const BoundTerms b = rate_bound_terms(2000, 0.05, 2.0, 0.6, v);
        EXPECT_LT(b.terms[0], a.terms[0]);
        EXPECT_EQ(b.terms[1], a.terms[1]);
        EXPECT_LT(b.terms[2], a.terms[2]);
        EXPECT_LT(b.terms[3], a.terms[3]);
    }
}

TEST(BoundTerms, InvalidInputs) {
    EXPECT_THROW(rate_bound_terms(100, 1.0, 2.0, 1.0, BoundVariant::gsir1), InputError);
    EXPECT_THROW(rate_bound_terms(100, 0.0, 2.0, 1.0, BoundVariant::gsir1), InputError);
    EXPECT_THROW(rate_bound_terms(0.5, 0.1, 2.0, 1.0, BoundVariant::gsir1), InputError);
    EXPECT_THROW(rate_bound_terms(100, 0.1, 1.0, 1.0, BoundVariant::gsir1), InputError);
}

namespace {

double bound_sum_slope(double alpha, double beta, double n_lo, double n_hi) {
    const RateTheory t = optimal_rate_theory(alpha, beta);
    std::vector<double> ns, sums;
    for (double n = n_lo; n <= n_hi * 1.0001; n *= 10.0) {
        ns.push_back(n);
        sums.push_back(rate_bound_terms(n, std::pow(n, -t.delta_opt), alpha, beta, BoundVariant::gsir1).sum);
    }
    return fit_loglog_slope(ns, sums).slope;
}

}  // namespace

TEST(BoundTerms, SumScalesAtOptimalRate) {
    EXPECT_NEAR(bound_sum_slope(2.0, 1.0, 1e3, 1e7), -2.0 / 7.0, 0.02);
    EXPECT_NEAR(bound_sum_slope(2.0, 0.25, 1e3, 1e7), -0.125, 0.02);
}

TEST(BoundTerms, SumSlopeApproachesOptimalExponent) {
    // Terms decaying faster than the optimum steepen the slope over a finite
    // window; the excess shrinks as the window moves out.
    for (double alpha : {1.5, 2.0, 3.0, 5.0, 10.0}) {
        for (double beta : {0.1, 0.25, 0.5, 0.75, 1.0, 2.0}) {
            const double rho = optimal_rate_theory(alpha, beta).exponent_opt;
            const double near = bound_sum_slope(alpha, beta, 1e3, 1e7) + rho;
            const double far = bound_sum_slope(alpha, beta, 1e10, 1e16) + rho;
            EXPECT_LE(near, 1e-12);
            EXPECT_GT(near, -0.03);
            EXPECT_LE(std::abs(far), std::abs(near) + 1e-12);
            EXPECT_LT(std::abs(far), 0.01);
        }
    }
}

TEST(LogLogSlope, ExactPowerLaw) {
    const std::vector<double> ns{100, 1000, 10000};
    std::vector<double> e;
    for (double n : ns) e.push_back(1.0 / std::sqrt(n));
    const SlopeFit f = fit_loglog_slope(ns, e);
    EXPECT_NEAR(f.slope, -0.5, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
}

TEST(LogLogSlope, Constant) {
    const SlopeFit f = fit_loglog_slope({10, 20, 40, 80}, {2, 2, 2, 2});
    EXPECT_NEAR(f.slope, 0.0, 1e-15);
}

TEST(LogLogSlope, MatchesDirectOls) {
    std::vector<double> ns, e;
    for (int k = 0; k < 8; ++k) {
        const double n = 100.0 * std::pow(2.0, k);
        ns.push_back(n);
        e.push_back(3.0 * std::pow(n, -0.3) * (1.0 + 0.01 * (k % 2 ? 1.0 : -1.0)));
    }
    // OLS oracle written out in sums.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double x = std::log(ns[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const SlopeFit f = fit_loglog_slope(ns, e);
    EXPECT_NEAR(f.slope, slope, 1e-12);
    EXPECT_NEAR(f.intercept, (sy - slope * sx) / m, 1e-12);
    EXPECT_NEAR(f.slope, -0.3, 0.01);
}

TEST(LogLogSlope, InvalidInputs) {
    EXPECT_THROW(fit_loglog_slope({10, 20}, {1, 2}), InputError);
    EXPECT_THROW(fit_loglog_slope({10, 20, 30}, {1, 0, 2}), InputError);
    EXPECT_THROW(fit_loglog_slope({10, 20, 30}, {1, 2}), InputError);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}
