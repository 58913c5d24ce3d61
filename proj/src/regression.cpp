#include "randinf/regression.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "randinf/errors.hpp"
#include "randinf/normal.hpp"

namespace randinf {

OlsFit ols_fit(const ObservedData& d) {
    if (d.n1 == 0 || d.n0 == 0) throw data_error("ols_fit: an arm is empty");
    if (d.size() < 3) throw data_error("ols_fit: need n >= 3 for the residual variance");

    double sum1 = 0, sum0 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) (d.t[i] ? sum1 : sum0) += d.y[i];
    const double mean1 = sum1 / static_cast<double>(d.n1);
    const double mean0 = sum0 / static_cast<double>(d.n0);
    const double grand = (sum1 + sum0) / static_cast<double>(d.size());

    OlsFit f;
    f.alpha_hat = mean0;
    f.beta_hat = mean1 - mean0;
    f.residuals.resize(d.size());
    double rss = 0, tss = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = d.y[i] - (d.t[i] ? mean1 : mean0);
        f.residuals[i] = e;
        rss += e * e;
        const double dg = d.y[i] - grand;
        tss += dg * dg;
    }
    f.sigma2_hat = rss / static_cast<double>(d.size() - 2);
    f.sigma2_mle = tss / static_cast<double>(d.size());
    return f;
}

double hw_variance(const OlsFit& fit, const ObservedData& d) {
    if (fit.residuals.size() != d.size())
        throw std::invalid_argument("hw_variance: fit/data size mismatch");
    const double tbar = static_cast<double>(d.n1) / static_cast<double>(d.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double c = static_cast<double>(d.t[i]) - tbar;
        num += fit.residuals[i] * fit.residuals[i] * c * c;
        den += c * c;
    }
    return num / (den * den);
}

TestResult wald_hw_test(const OlsFit& fit, const ObservedData& d) {
    const double v = hw_variance(fit, d);
    TestResult t;
    t.method = test_method::wald_hw;
    if (v <= 0.0) {
        t.degenerate = true;
        t.statistic = fit.beta_hat == 0.0 ? 0.0
                                          : std::copysign(
                                                std::numeric_limits<double>::infinity(),
                                                fit.beta_hat);
        t.p_value = fit.beta_hat == 0.0 ? 1.0 : 0.0;
        return t;
    }
    t.statistic = fit.beta_hat / std::sqrt(v);
    t.p_value = two_sided_normal_p(t.statistic);
    return t;
}

double score_variance(const ObservedData& d) {
    const auto r = variance_report(d);
    const double n = static_cast<double>(d.size());
    return (n - 1.0) * r.ssq / (static_cast<double>(d.n1) * static_cast<double>(d.n0));
}

TestResult score_test(const ObservedData& d) {
    const auto r = variance_report(d);
    const double n = static_cast<double>(d.size());
    const double v = (n - 1.0) * r.ssq /
                     (static_cast<double>(d.n1) * static_cast<double>(d.n0));
    TestResult t;
    t.method = test_method::score;
    if (v <= 0.0) {
        t.degenerate = true;
        t.statistic = r.tau_hat == 0.0 ? 0.0
                                       : std::copysign(
                                             std::numeric_limits<double>::infinity(),
                                             r.tau_hat);
        t.p_value = r.tau_hat == 0.0 ? 1.0 : 0.0;
        return t;
    }
    t.statistic = r.tau_hat / std::sqrt(v);
    t.p_value = two_sided_normal_p(t.statistic);
    return t;
}

} // namespace randinf
