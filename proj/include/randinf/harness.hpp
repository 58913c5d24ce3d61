#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "randinf/defaults.hpp"
#include "randinf/estimators.hpp"
#include "randinf/inference.hpp"
#include "randinf/population.hpp"

namespace randinf {

enum class design_kind { crd, matched_pairs, factorial };

/* One simulation scenario: freeze a population from the master seed, then for
 * each replicate draw an assignment, run the normal-approximation test and
 * the randomization test, and tabulate agreement. Replicate i always uses
 * rng::stream(master_seed, i+1): results are byte-identical for any worker
 * count. Stream 0 is reserved for the population draw. */
struct ScenarioConfig {
    design_kind design = design_kind::crd;

    // two-arm experiment
    std::size_t n = 100, n1 = 50;
    double mu1 = 0.1, var1 = 0.0625;
    double mu0 = 0.0, var0 = 0.0625;
    /// Optional pre-built population; overrides the normal draw when set.
    std::shared_ptr<const PotentialTable> population;
    /// Rescale the frozen draw so sample moments hit the targets exactly.
    bool exact_moments = false;

    // matched pairs (uses mu/var above for unit potentials)
    std::size_t n_pairs = 50;

    // factorial (cell_means must have 2^k entries when design==factorial)
    int k = 2;
    std::size_t r = 2;
    std::vector<double> cell_means;
    double cell_sd = 0.25;

    std::size_t reps = 1000;
    std::uint64_t m = defaults::mc_draws;
    double alpha = defaults::alpha;
    frt_statistic statistic = frt_statistic::diff_in_means;
    std::uint64_t master_seed = 0;
    unsigned workers = 0; // 0 = hardware concurrency
};

/// Agreement counts. Rows: normal-approximation test keep/reject.
/// Columns: randomization test keep/reject.
struct RejectionTable {
    std::uint64_t keep_keep = 0, keep_reject = 0;
    std::uint64_t reject_keep = 0, reject_reject = 0;

    std::uint64_t total() const {
        return keep_keep + keep_reject + reject_keep + reject_reject;
    }
};

struct VarianceScatterRow {
    std::size_t rep = 0;
    double v_neyman = 0, v_fisher = 0;
};

struct ScenarioResult {
    RejectionTable table;
    std::vector<VarianceScatterRow> scatter; // one row per non-degenerate replicate
    std::uint64_t degenerate = 0;            // zero-variance replicates, excluded
    std::size_t reps_used = 0;
    double rate_neyman = 0, se_neyman = 0; // rejection rate and binomial SE
    double rate_fisher = 0, se_fisher = 0;
    double mean_v_neyman = 0, mean_v_fisher = 0;
    PopulationSummary population_summary; // two-arm designs only
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Mean simulated excess of the pooled over the two-sample variance estimate
/// vs. the closed-form prediction from population moments.
struct GapCheckResult {
    double predicted = 0;
    double empirical_mean = 0;
    double relative_deviation = 0; // (empirical - predicted) / predicted
    std::size_t reps = 0;
};

/// Supports design_kind::crd and design_kind::factorial.
GapCheckResult verify_variance_gap(const ScenarioConfig& cfg);

enum class effect_scaling {
    local_root_n, // constant effect c / sqrt(n): power stabilizes, gap vanishes
    fixed,        // constant effect c at every n
};

struct SweepPoint {
    std::size_t n = 0;
    double tau = 0;
    double power_neyman = 0, power_fisher = 0;
    double se = 0; // binomial SE at the realized rates' scale (worst case 0.5)
};

/* Balanced two-arm power sweep over n with a constant-effect population
 * (control potentials normal, treated = control + tau). */
std::vector<SweepPoint> local_alternative_sweep(double c,
                                                const std::vector<std::size_t>& n_grid,
                                                std::size_t reps, std::uint64_t m,
                                                std::uint64_t seed,
                                                effect_scaling scaling,
                                                double base_var = 0.0625,
                                                unsigned workers = 0);

/* Zero-mean-gap population with unequal arm variances and unequal arm sizes:
 * the mean-difference randomization test stays quiet while the normal test
 * and the variance-ratio randomization test fire. */
struct HeterogeneityResult {
    double rate_frt_diff = 0;
    double rate_neyman = 0;
    double rate_frt_var_ratio = 0;
    std::size_t reps = 0;
};

HeterogeneityResult heterogeneity_demo(const ScenarioConfig& cfg);

} // namespace randinf
