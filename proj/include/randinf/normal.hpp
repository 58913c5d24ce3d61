#pragma once

namespace randinf {

/// Standard-normal CDF, accurate to ~1 ulp (erfc-based).
double normal_cdf(double x);

/// Standard-normal quantile for p in (0,1). Rational initial guess refined by
/// Halley steps against normal_cdf; falls back to bisection if refinement
/// ever fails to improve. Absolute error well under 1e-12.
double normal_quantile(double p);

/// Two-sided p-value for an asymptotically standard-normal statistic z.
double two_sided_normal_p(double z);

} // namespace randinf
