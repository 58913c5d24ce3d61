#pragma once

#include <cstdint>
#include <vector>

#include "randinf/population.hpp"

namespace randinf {

/* The mean-difference estimate together with every variance estimate this
 * library compares, all from observed data alone. Sample variances use the
 * n_t - 1 (within-arm) and n - 1 (pooled) divisors; a constant arm yields a
 * zero variance rather than an error. */
struct VarianceReport {
    double tau_hat = 0;

    double v_neyman = 0;   // s1sq/n1 + s0sq/n0
    double v_fisher = 0;   // n * ssq / (n1 * n0)
    double v_ols = 0;      // classical equal-variance regression form
    double v_hw = 0;       // heteroskedasticity-robust sandwich form
    double v_score = 0;    // (n-1) * ssq / (n1 * n0)
    double v_improved = 0; // Cauchy-Schwarz-sharpened conservative form

    double s1sq = 0, s0sq = 0; // within-arm sample variances
    double ssq = 0;            // pooled sample variance about the grand mean

    std::size_t n1 = 0, n0 = 0;
};

/// Treated-arm mean minus control-arm mean. Both arms must be nonempty.
double diff_in_means(const ObservedData& d);

/// All variance estimates at once. Both arms need >= 2 units.
VarianceReport variance_report(const ObservedData& d);

/* Predicted mean excess of the pooled-variance estimate over the two-sample
 * estimate for a two-arm experiment on this population:
 * (1/n0 - 1/n1)(s1sq - s0sq) + tau^2 / n. */
double predicted_variance_gap(const PopulationSummary& s, std::size_t n1, std::size_t n0);

/// Binary outcomes: proportions with unpooled and pooled binomial variances.
struct BinaryVarianceReport {
    double p1_hat = 0, p0_hat = 0, pooled_p = 0;
    double v_unpooled = 0; // p1(1-p1)/n1 + p0(1-p0)/n0
    double v_pooled = 0;   // p(1-p)(1/n1 + 1/n0)
    std::size_t n1 = 0, n0 = 0;
    bool arm1_constant = false, arm0_constant = false;
};

/// Requires every outcome to be exactly 0 or 1.
BinaryVarianceReport binary_report(const ObservedData& d);

/// Pooled-minus-unpooled gap in proportion form:
/// (1/n0 - 1/n1)(p1(1-p1) - p0(1-p0)) + (p1-p0)^2 / n.
double binary_variance_gap(double p1, double p0, std::size_t n1, std::size_t n0);

/// Matched pairs: per-pair treated-minus-control differences and the two
/// variance estimates whose disagreement the pair design exhibits exactly.
struct PairEffectReport {
    double tau_hat = 0;
    std::vector<double> per_pair;  // signed within-pair differences
    double v_neyman = 0;           // sum (d_i - dbar)^2 / (n(n-1))
    double v_fisher = 0;           // sum d_i^2 / n^2
};

PairEffectReport pair_report(const PairObservedData& d);
PairEffectReport pair_report(const MatchedPairTable& mt, const PairAssignment& a);

/// Balanced 2^k factorial effect for a +/-1 contrast over canonical cells.
struct FactorialEffectReport {
    double effect = 0;              // contrast . cell means / 2^(k-1)
    double v_neyman = 0;            // sum_z s^2(z) / (2^(2(k-1)) r)
    double v_fisher = 0;            // 2^k * ssq / (2^(2(k-1)) r)
    std::vector<double> cell_means; // observed mean per cell
    std::vector<double> cell_vars;  // observed variance per cell (r-1 divisor)
    int k = 1;
    std::size_t r = 1;
};

FactorialEffectReport factorial_report(const FactorialObservedData& d,
                                       const std::vector<int>& contrast);
FactorialEffectReport factorial_report(const FactorialTable& ft,
                                       const FactorialAssignment& a,
                                       const std::vector<int>& contrast);

/* Predicted mean excess of the pooled factorial variance estimate over the
 * per-cell one, from population cell means alone:
 * sum_{z,z'} (mean(z) - mean(z'))^2 / (2^(3k-1) r), both orders counted. */
double predicted_factorial_variance_gap(const std::vector<double>& cell_means,
                                        int k, std::size_t r);

} // namespace randinf
