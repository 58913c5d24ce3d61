#pragma once

#include <cstdint>
#include <vector>

#include "randinf/design.hpp"
#include "randinf/rng.hpp"

namespace randinf {

/* A finite population's full outcome schedule for a two-arm experiment:
 * each unit carries the value it would show under treatment and the value it
 * would show under control. Frozen at construction. */
class PotentialTable {
public:
    /// Validates equal lengths >= 2 and finite entries.
    PotentialTable(std::vector<double> treated, std::vector<double> control);

    std::size_t size() const noexcept { return y1_.size(); }
    const std::vector<double>& treated() const noexcept { return y1_; }
    const std::vector<double>& control() const noexcept { return y0_; }
    double unit_effect(std::size_t i) const { return y1_[i] - y0_[i]; }

private:
    std::vector<double> y1_, y0_;
};

/// Finite-population moments (n-1 divisors throughout).
struct PopulationSummary {
    std::size_t n = 0;
    double mean1 = 0, mean0 = 0;
    double tau = 0;        // mean1 - mean0
    double s1sq = 0;       // treated-arm potential variance
    double s0sq = 0;       // control-arm potential variance
    double stausq = 0;     // unit-effect variance
    double s10 = 0;        // potential-outcome covariance

    /// Exact randomization variance of the mean-difference estimator for the
    /// given arm sizes: s1sq/n1 + s0sq/n0 - stausq/n.
    double sampling_variance(std::size_t n1, std::size_t n0) const;
};

PopulationSummary summarize_population(const PotentialTable& pt);

/// Independent normal potentials per arm, frozen from the seed.
PotentialTable freeze_normal_population(std::size_t n, double mu1, double var1,
                                        double mu0, double var0, std::uint64_t seed);

/// Affine per-arm rescale so the sample moments hit the targets exactly.
/// Requires both arms non-constant.
PotentialTable rescale_to_moments(const PotentialTable& pt, double mu1, double var1,
                                  double mu0, double var0);

/* Matched pairs: each pair holds two units with their own treated/control
 * potentials; within a pair exactly one unit is treated. */
struct PairPotentials {
    double first_y1, first_y0;
    double second_y1, second_y0;
};

class MatchedPairTable {
public:
    explicit MatchedPairTable(std::vector<PairPotentials> pairs);

    std::size_t n_pairs() const noexcept { return pairs_.size(); }
    const std::vector<PairPotentials>& pairs() const noexcept { return pairs_; }

private:
    std::vector<PairPotentials> pairs_;
};

/* Balanced 2^k factorial: every unit has a potential outcome under each of
 * the 2^k cells. Cells are kept in canonical order: cell j puts factor f at
 * level +1 iff bit (k-f) of j is clear, so lexicographically +1 sorts before
 * -1 and cell 0 is the all-+1 cell. */
class FactorialTable {
public:
    /// values is row-major unit x cell, length (r * 2^k) * 2^k.
    FactorialTable(int k, std::size_t r, std::vector<double> values);

    int k() const noexcept { return k_; }
    std::size_t r() const noexcept { return r_; }
    std::size_t cells() const noexcept { return std::size_t{1} << k_; }
    std::size_t size() const noexcept { return r_ << k_; }
    double y(std::size_t unit, std::size_t cell) const {
        return values_[unit * cells() + cell];
    }

    /// +/-1 levels of factor f (1-based) across canonical cells.
    std::vector<int> main_effect_contrast(int factor) const;

    /// Population mean per cell (over all units).
    std::vector<double> cell_population_means() const;

private:
    int k_;
    std::size_t r_;
    std::vector<double> values_;
};

/// What an experiment actually reveals: one outcome per unit plus its arm.
struct ObservedData {
    std::vector<double> y;
    std::vector<std::uint8_t> t; // 1 = treated
    std::size_t n1 = 0, n0 = 0;

    std::size_t size() const noexcept { return y.size(); }
};

/// Validating constructor for externally supplied observed data.
ObservedData make_observed(std::vector<double> y, std::vector<std::uint8_t> t);

/// Reveal the outcomes selected by a two-arm assignment.
ObservedData observe(const PotentialTable& pt, const Assignment& a);

/// Matched-pair observed data: one treated and one control outcome per pair.
struct PairObservedData {
    std::vector<double> first, second;       // observed outcome of each unit
    std::vector<std::uint8_t> first_treated; // which unit got treatment

    std::size_t n_pairs() const noexcept { return first.size(); }
};

PairObservedData observe_pairs(const MatchedPairTable& mt, const PairAssignment& a);

/// Factorial observed data: each unit's outcome under its assigned cell.
struct FactorialObservedData {
    std::vector<double> y;
    std::vector<std::uint32_t> cell;
    int k = 1;
    std::size_t r = 1;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t cells() const noexcept { return std::size_t{1} << k; }
};

FactorialObservedData observe_factorial(const FactorialTable& ft,
                                        const FactorialAssignment& a);

/* Worst-case leverage of a finite population: max_i (x_i - xbar)^2 divided by
 * the mean squared deviation. Small values relative to the sample sizes
 * support normal approximation of sample means; the ratio is reported raw and
 * thresholding is left to the caller. n_sample must satisfy 1 <= n_sample < N. */
double hajek_diagnostic(const std::vector<double>& x, std::size_t n_sample);

} // namespace randinf
