#include "randinf/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace randinf {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

double two_sided_normal_p(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    return std::erfc(std::fabs(z) * 0.7071067811865475244);
}

namespace {

/* Rational approximation of the quantile (Acklam). Max relative error about
 * 1.15e-9 before refinement. */
double quantile_guess(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double bisect_quantile(double p, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");

    double x = quantile_guess(p);
    // Halley refinement against the erfc-based CDF
    const double sqrt2pi = 2.5066282746310005024;
    for (int i = 0; i < 3; ++i) {
        const double e = normal_cdf(x) - p;
        const double u = e * sqrt2pi * std::exp(0.5 * x * x);
        const double step = u / (1.0 + 0.5 * x * u);
        if (!std::isfinite(step)) break;
        x -= step;
    }
    const double err = normal_cdf(x) - p;
    if (std::fabs(err) > 1e-12) {
        // pathological p (deep tails): fall back to hard bracketing
        double lo = x, hi = x;
        while (normal_cdf(lo) > p) lo -= 1.0;
        while (normal_cdf(hi) < p) hi += 1.0;
        x = bisect_quantile(p, lo, hi);
    }
    return x;
}

} // namespace randinf
