#pragma once

#include <vector>

#include "randinf/inference.hpp"
#include "randinf/population.hpp"

namespace randinf {

/* Least squares of outcome on an intercept and the 0/1 treatment label.
 * With a single binary regressor the fit is closed-form: the intercept is
 * the control-arm mean and the slope is the mean difference. */
struct OlsFit {
    double alpha_hat = 0;  // intercept: control-arm mean
    double beta_hat = 0;   // slope: treated-minus-control mean difference
    double sigma2_hat = 0; // residual variance, n-2 divisor
    double sigma2_mle = 0; // variance of y about its grand mean, n divisor
    std::vector<double> residuals;
};

/// Needs both arms nonempty and n >= 3.
OlsFit ols_fit(const ObservedData& d);

/// Heteroskedasticity-robust slope variance computed by the residual
/// sandwich route: sum e_i^2 (t_i - tbar)^2 / (sum (t_i - tbar)^2)^2.
double hw_variance(const OlsFit& fit, const ObservedData& d);

/// Wald z test of zero slope against hw_variance.
TestResult wald_hw_test(const OlsFit& fit, const ObservedData& d);

/// Slope variance the score test uses: (n-1) ssq / (n1 n0), with ssq the
/// variance of y about its grand mean (the null-restricted fit's scale).
double score_variance(const ObservedData& d);

/// Score z test of zero slope. Its variance matches the pooled
/// randomization-test variance up to the factor (n-1)/n exactly.
TestResult score_test(const ObservedData& d);

} // namespace randinf
