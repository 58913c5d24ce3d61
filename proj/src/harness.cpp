#include "randinf/harness.hpp"

#include <cmath>
#include <stdexcept>

#include "randinf/errors.hpp"
#include "randinf/parallel.hpp"

namespace randinf {

namespace {

struct RepOutcome {
    bool degenerate = false;
    bool reject_neyman = false;
    bool reject_fisher = false;
    double v_neyman = 0, v_fisher = 0;
};

double binomial_se(double rate, std::size_t n) {
    return n ? std::sqrt(rate * (1.0 - rate) / static_cast<double>(n)) : 0.0;
}

std::shared_ptr<const PotentialTable> build_two_arm_population(const ScenarioConfig& cfg) {
    if (cfg.population) return cfg.population;
    auto pop = freeze_normal_population(cfg.n, cfg.mu1, cfg.var1, cfg.mu0, cfg.var0,
                                        cfg.master_seed);
    if (cfg.exact_moments)
        pop = rescale_to_moments(pop, cfg.mu1, cfg.var1, cfg.mu0, cfg.var0);
    return std::make_shared<const PotentialTable>(std::move(pop));
}

MatchedPairTable build_pair_population(const ScenarioConfig& cfg) {
    rng g = rng::stream(cfg.master_seed, 0);
    const double sd1 = std::sqrt(cfg.var1), sd0 = std::sqrt(cfg.var0);
    std::vector<PairPotentials> pairs(cfg.n_pairs);
    for (auto& p : pairs) {
        p.first_y1 = cfg.mu1 + sd1 * g.normal();
        p.first_y0 = cfg.mu0 + sd0 * g.normal();
        p.second_y1 = cfg.mu1 + sd1 * g.normal();
        p.second_y0 = cfg.mu0 + sd0 * g.normal();
    }
    return MatchedPairTable(std::move(pairs));
}

FactorialTable build_factorial_population(const ScenarioConfig& cfg) {
    const std::size_t cells = std::size_t{1} << cfg.k;
    if (cfg.cell_means.size() != cells)
        throw std::invalid_argument("run_scenario: cell_means must have 2^k entries");
    rng g = rng::stream(cfg.master_seed, 0);
    const std::size_t n = cfg.r * cells;
    std::vector<double> values(n * cells);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cells; ++j)
            values[i * cells + j] = cfg.cell_means[j] + cfg.cell_sd * g.normal();

    if (cfg.exact_moments && n >= 2 && cfg.cell_sd > 0) {
        // standardize each cell column to its exact target mean and sd
        for (std::size_t j = 0; j < cells; ++j) {
            double m = 0;
            for (std::size_t i = 0; i < n; ++i) m += values[i * cells + j];
            m /= static_cast<double>(n);
            double q = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dv = values[i * cells + j] - m;
                q += dv * dv;
            }
            const double sd = std::sqrt(q / static_cast<double>(n - 1));
            if (sd == 0) throw data_error("run_scenario: constant factorial cell column");
            const double f = cfg.cell_sd / sd;
            for (std::size_t i = 0; i < n; ++i)
                values[i * cells + j] = cfg.cell_means[j] + (values[i * cells + j] - m) * f;
        }
    }
    return FactorialTable(cfg.k, cfg.r, std::move(values));
}

void aggregate(const std::vector<RepOutcome>& outcomes, ScenarioResult& res,
               double /*alpha*/) {
    std::uint64_t reject_n = 0, reject_f = 0;
    double sum_vn = 0, sum_vf = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.degenerate) {
            ++res.degenerate;
            continue;
        }
        res.scatter.push_back({i, o.v_neyman, o.v_fisher});
        sum_vn += o.v_neyman;
        sum_vf += o.v_fisher;
        reject_n += o.reject_neyman;
        reject_f += o.reject_fisher;
        auto& cell = o.reject_neyman ? (o.reject_fisher ? res.table.reject_reject
                                                        : res.table.reject_keep)
                                     : (o.reject_fisher ? res.table.keep_reject
                                                        : res.table.keep_keep);
        ++cell;
    }
    res.reps_used = res.scatter.size();
    if (res.reps_used) {
        const auto used = static_cast<double>(res.reps_used);
        res.rate_neyman = static_cast<double>(reject_n) / used;
        res.rate_fisher = static_cast<double>(reject_f) / used;
        res.mean_v_neyman = sum_vn / used;
        res.mean_v_fisher = sum_vf / used;
    }
    res.se_neyman = binomial_se(res.rate_neyman, res.reps_used);
    res.se_fisher = binomial_se(res.rate_fisher, res.reps_used);
}

void validate_common(const ScenarioConfig& cfg) {
    if (cfg.reps == 0) throw std::invalid_argument("run_scenario: need reps >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("run_scenario: alpha must lie in (0,1)");
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    validate_common(cfg);
    ScenarioResult res;
    std::vector<RepOutcome> outcomes(cfg.reps);

    if (cfg.design == design_kind::crd) {
        if (cfg.n1 == 0 || cfg.n1 >= cfg.n)
            throw std::invalid_argument("run_scenario: need 0 < n1 < n");
        auto pop = build_two_arm_population(cfg);
        if (pop->size() != cfg.n)
            throw std::invalid_argument("run_scenario: population size != n");
        res.population_summary = summarize_population(*pop);

        parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
            rng g = rng::stream(cfg.master_seed, i + 1);
            const auto a = draw_crd(cfg.n, cfg.n1, g);
            const auto d = observe(*pop, a);
            const auto vr = variance_report(d);
            auto& o = outcomes[i];
            if (vr.v_neyman == 0.0 ||
                (cfg.statistic == frt_statistic::variance_ratio && vr.s0sq == 0.0)) {
                o.degenerate = true;
                return;
            }
            o.v_neyman = vr.v_neyman;
            o.v_fisher = vr.v_fisher;
            o.reject_neyman = neyman_test(vr).reject_at(cfg.alpha);
            o.reject_fisher =
                frt_monte_carlo(d, cfg.statistic, cfg.m, g).reject_at(cfg.alpha);
        });
    } else if (cfg.design == design_kind::matched_pairs) {
        const auto pop = build_pair_population(cfg);
        parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
            rng g = rng::stream(cfg.master_seed, i + 1);
            const auto a = draw_pairs(cfg.n_pairs, g);
            const auto rep = pair_report(pop, a);
            auto& o = outcomes[i];
            if (rep.v_neyman == 0.0) {
                o.degenerate = true;
                return;
            }
            o.v_neyman = rep.v_neyman;
            o.v_fisher = rep.v_fisher;
            const auto tests = pair_tests(rep, g, pair_frt_mode::auto_select, cfg.m);
            o.reject_neyman = tests.neyman.reject_at(cfg.alpha);
            o.reject_fisher = tests.fisher.reject_at(cfg.alpha);
        });
    } else {
        const auto pop = build_factorial_population(cfg);
        const auto contrast = pop.main_effect_contrast(1);
        parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
            rng g = rng::stream(cfg.master_seed, i + 1);
            const auto a = draw_factorial(cfg.k, cfg.r, g);
            const auto d = observe_factorial(pop, a);
            const auto rep = factorial_report(d, contrast);
            auto& o = outcomes[i];
            if (rep.v_neyman == 0.0) {
                o.degenerate = true;
                return;
            }
            o.v_neyman = rep.v_neyman;
            o.v_fisher = rep.v_fisher;
            const auto tests = factorial_tests(rep, d, contrast, cfg.m, g);
            o.reject_neyman = tests.neyman.reject_at(cfg.alpha);
            o.reject_fisher = tests.fisher.reject_at(cfg.alpha);
        });
    }

    aggregate(outcomes, res, cfg.alpha);
    return res;
}

GapCheckResult verify_variance_gap(const ScenarioConfig& cfg) {
    validate_common(cfg);
    GapCheckResult out;
    out.reps = cfg.reps;
    std::vector<double> gaps(cfg.reps);

    if (cfg.design == design_kind::crd) {
        if (cfg.n1 == 0 || cfg.n1 >= cfg.n)
            throw std::invalid_argument("verify_variance_gap: need 0 < n1 < n");
        auto pop = build_two_arm_population(cfg);
        const auto summary = summarize_population(*pop);
        out.predicted = predicted_variance_gap(summary, cfg.n1, cfg.n - cfg.n1);
        parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
            rng g = rng::stream(cfg.master_seed, i + 1);
            const auto d = observe(*pop, draw_crd(cfg.n, cfg.n1, g));
            const auto vr = variance_report(d);
            gaps[i] = vr.v_fisher - vr.v_neyman;
        });
    } else if (cfg.design == design_kind::factorial) {
        const auto pop = build_factorial_population(cfg);
        const auto contrast = pop.main_effect_contrast(1);
        out.predicted =
            predicted_factorial_variance_gap(pop.cell_population_means(), cfg.k, cfg.r);
        parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
            rng g = rng::stream(cfg.master_seed, i + 1);
            const auto d = observe_factorial(pop, draw_factorial(cfg.k, cfg.r, g));
            const auto rep = factorial_report(d, contrast);
            gaps[i] = rep.v_fisher - rep.v_neyman;
        });
    } else {
        throw std::invalid_argument("verify_variance_gap: unsupported design");
    }

    double sum = 0;
    for (double v : gaps) sum += v;
    out.empirical_mean = sum / static_cast<double>(cfg.reps);
    out.relative_deviation =
        out.predicted != 0.0 ? (out.empirical_mean - out.predicted) / out.predicted : 0.0;
    return out;
}

std::vector<SweepPoint> local_alternative_sweep(double c,
                                                const std::vector<std::size_t>& n_grid,
                                                std::size_t reps, std::uint64_t m,
                                                std::uint64_t seed,
                                                effect_scaling scaling, double base_var,
                                                unsigned workers) {
    if (reps == 0 || m == 0)
        throw std::invalid_argument("local_alternative_sweep: need reps, m >= 1");
    std::vector<SweepPoint> out;
    out.reserve(n_grid.size());
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const std::size_t n = n_grid[gi];
        if (n < 4 || n % 2)
            throw std::invalid_argument("local_alternative_sweep: n must be even, >= 4");
        const double tau = scaling == effect_scaling::local_root_n
                               ? c / std::sqrt(static_cast<double>(n))
                               : c;
        // a private master seed per grid point keeps streams disjoint
        std::uint64_t chain = seed ^ (0x9e3779b97f4a7c15ull * (gi + 1));
        const std::uint64_t sub_seed = detail::splitmix64(chain);

        rng gpop = rng::stream(sub_seed, 0);
        const double sd0 = std::sqrt(base_var);
        std::vector<double> y0(n), y1(n);
        for (std::size_t i = 0; i < n; ++i) {
            y0[i] = sd0 * gpop.normal();
            y1[i] = y0[i] + tau; // constant unit effect
        }
        const auto pop =
            std::make_shared<const PotentialTable>(std::move(y1), std::move(y0));

        std::vector<std::uint8_t> rej_n(reps, 0), rej_f(reps, 0);
        parallel_for(reps, workers, [&](std::size_t i) {
            rng g = rng::stream(sub_seed, i + 1);
            const auto d = observe(*pop, draw_crd(n, n / 2, g));
            const auto vr = variance_report(d);
            if (vr.v_neyman == 0.0) return; // impossible for continuous draws
            rej_n[i] = neyman_test(vr).reject_at(defaults::alpha);
            rej_f[i] = frt_monte_carlo(d, frt_statistic::diff_in_means, m, g)
                           .reject_at(defaults::alpha);
        });

        SweepPoint p;
        p.n = n;
        p.tau = tau;
        std::uint64_t cn = 0, cf = 0;
        for (std::size_t i = 0; i < reps; ++i) {
            cn += rej_n[i];
            cf += rej_f[i];
        }
        p.power_neyman = static_cast<double>(cn) / static_cast<double>(reps);
        p.power_fisher = static_cast<double>(cf) / static_cast<double>(reps);
        p.se = binomial_se(0.5, reps);
        out.push_back(p);
    }
    return out;
}

HeterogeneityResult heterogeneity_demo(const ScenarioConfig& cfg) {
    validate_common(cfg);
    if (cfg.design != design_kind::crd)
        throw std::invalid_argument("heterogeneity_demo: two-arm design only");
    if (cfg.n1 == 0 || cfg.n1 >= cfg.n)
        throw std::invalid_argument("heterogeneity_demo: need 0 < n1 < n");
    auto pop = build_two_arm_population(cfg);

    std::vector<std::uint8_t> rej_diff(cfg.reps, 0), rej_ney(cfg.reps, 0),
        rej_ratio(cfg.reps, 0);
    parallel_for(cfg.reps, cfg.workers, [&](std::size_t i) {
        rng g = rng::stream(cfg.master_seed, i + 1);
        const auto d = observe(*pop, draw_crd(cfg.n, cfg.n1, g));
        const auto vr = variance_report(d);
        if (vr.v_neyman == 0.0 || vr.s0sq == 0.0) return;
        rej_ney[i] = neyman_test(vr).reject_at(cfg.alpha);
        rej_diff[i] = frt_monte_carlo(d, frt_statistic::diff_in_means, cfg.m, g)
                          .reject_at(cfg.alpha);
        rej_ratio[i] = frt_monte_carlo(d, frt_statistic::variance_ratio, cfg.m, g)
                           .reject_at(cfg.alpha);
    });

    HeterogeneityResult out;
    out.reps = cfg.reps;
    std::uint64_t cd = 0, cn = 0, cr = 0;
    for (std::size_t i = 0; i < cfg.reps; ++i) {
        cd += rej_diff[i];
        cn += rej_ney[i];
        cr += rej_ratio[i];
    }
    out.rate_frt_diff = static_cast<double>(cd) / static_cast<double>(cfg.reps);
    out.rate_neyman = static_cast<double>(cn) / static_cast<double>(cfg.reps);
    out.rate_frt_var_ratio = static_cast<double>(cr) / static_cast<double>(cfg.reps);
    return out;
}

} // namespace randinf
