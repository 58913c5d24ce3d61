#pragma once

#include <cstdint>
#include <vector>

#include "randinf/defaults.hpp"
#include "randinf/estimators.hpp"
#include "randinf/population.hpp"
#include "randinf/rng.hpp"

namespace randinf {

enum class test_method {
    neyman,           // mean-difference z test, two-sample variance
    frt_mc,           // randomization test, Monte Carlo draws
    frt_exact,        // randomization test, complete enumeration
    frt_var_ratio,    // randomization test of the within-arm variance ratio
    pair_neyman,
    pair_frt,
    factorial_neyman,
    factorial_frt,
    wald_hw,          // regression Wald test, robust variance
    score,            // regression score test
};

struct TestResult {
    test_method method = test_method::neyman;
    /// z value for normal-approximation tests; observed statistic for
    /// randomization tests.
    double statistic = 0;
    double p_value = 1;
    std::uint64_t m_draws = 0; // Monte Carlo draws (0 = exact or asymptotic)
    /// Randomization-test tallies; for the exact test p = extreme/total as an
    /// integer ratio.
    std::uint64_t extreme_count = 0, total_count = 0;
    bool degenerate = false;

    bool reject_at(double alpha) const { return p_value <= alpha; }
};

enum class frt_statistic { diff_in_means, variance_ratio };

struct frt_options {
    /// Fold the observed assignment into the Monte Carlo tally:
    /// p = (1 + extreme) / (1 + m). Off by default (plain average).
    bool add_one = false;
};

/// Mean-difference z test against the two-sample variance estimate.
TestResult neyman_test(const ObservedData& d);
TestResult neyman_test(const VarianceReport& r);

/// Sharp-null randomization test by Monte Carlo re-assignment. Ties count as
/// extreme (>=). A statistic that is constant across draws yields p = 1 with
/// the degenerate flag set.
TestResult frt_monte_carlo(const ObservedData& d, frt_statistic stat, std::uint64_t m,
                           rng& g, frt_options opt = {});

/// Sharp-null randomization test by complete enumeration in lexicographic
/// order; refuses more than cap assignments.
TestResult frt_exact(const ObservedData& d, frt_statistic stat,
                     std::uint64_t cap = defaults::enumeration_cap);

/// Within-arm variance ratio s1sq/s0sq (two-sided extremeness is judged on
/// the log scale). Requires a non-constant control arm.
double variance_ratio_statistic(const ObservedData& d);

enum class interval_method { neyman, fiducial };

struct IntervalResult {
    interval_method method = interval_method::neyman;
    double level = 0.95;
    double lower = 0, upper = 0;
    std::uint64_t m_draws = 0;
    bool truncated = false;      // endpoint clipped at the search box
    bool hull_violation = false; // retained set not contiguous on the grid
    bool empty = false;

    double width() const { return upper - lower; }
};

/// Symmetric normal-approximation interval about the mean difference.
IntervalResult neyman_interval(const ObservedData& d, double level);
IntervalResult neyman_interval(const VarianceReport& r, double level);

struct fiducial_options {
    bool exact = false; // enumerate assignments instead of Monte Carlo
    std::uint64_t cap = defaults::enumeration_cap;
    int grid_points = 201;
    double search_halfwidth_sds = 10.0; // box half-width in sqrt(v_neyman) units
    bool add_one = false;
};

/* Test inversion: the set of constant-shift nulls the randomization test
 * fails to reject at 1-level. One draw set (or one enumeration) is shared
 * across every candidate shift, making the acceptance region piecewise
 * constant; endpoints are then refined by bisection to 1e-4*sqrt(v_neyman).
 * The candidate equal to the observed mean difference is always retained. */
IntervalResult fiducial_interval(const ObservedData& d, double level, std::uint64_t m,
                                 rng& g, fiducial_options opt = {});

enum class pair_frt_mode {
    auto_select,   // exhaustive when 2^n_pairs is affordable, else Monte Carlo
    exhaustive,    // all 2^n_pairs sign patterns
    monte_carlo,   // m random sign patterns
    normal_approx, // z against the pair pooled variance
};

struct PairTestResults {
    TestResult neyman; // z against the between-pair variance
    TestResult fisher; // sign-flip randomization test
};

PairTestResults pair_tests(const PairEffectReport& rep, rng& g,
                           pair_frt_mode mode = pair_frt_mode::auto_select,
                           std::uint64_t m = defaults::mc_draws);

struct FactorialTestResults {
    TestResult neyman; // z against the per-cell variance estimate
    TestResult fisher; // re-randomization test, Monte Carlo
};

FactorialTestResults factorial_tests(const FactorialEffectReport& rep,
                                     const FactorialObservedData& d,
                                     const std::vector<int>& contrast, std::uint64_t m,
                                     rng& g);

} // namespace randinf
