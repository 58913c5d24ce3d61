#include "randinf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "randinf/errors.hpp"
#include "randinf/normal.hpp"

namespace randinf {

namespace {

std::vector<std::size_t> sorted_treated_indices(const ObservedData& d) {
    std::vector<std::size_t> idx;
    idx.reserve(d.n1);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.t[i]) idx.push_back(i);
    return idx;
}

double total_sum(const std::vector<double>& y) {
    double s = 0;
    for (double v : y) s += v;
    return s;
}

double total_sumsq(const std::vector<double>& y) {
    double s = 0;
    for (double v : y) s += v * v;
    return s;
}

/* Statistic kernels. The observed value and every re-randomized value go
 * through the same formulas so that re-drawing the observed assignment
 * reproduces the observed statistic exactly. */

double diff_stat(double treated_sum, double total, double n1, double n0) {
    return treated_sum / n1 - (total - treated_sum) / n0;
}

// two-sided extremeness of the variance ratio, on the log scale
double ratio_extremeness(double treated_sum, double treated_sumsq, double total,
                         double sumsq, double n1, double n0) {
    double q1 = treated_sumsq - treated_sum * treated_sum / n1;
    double q0 = (sumsq - treated_sumsq) -
                (total - treated_sum) * (total - treated_sum) / n0;
    if (q1 < 0) q1 = 0; // guard tiny negative from cancellation
    if (q0 < 0) q0 = 0;
    const double s1 = q1 / (n1 - 1.0);
    const double s0 = q0 / (n0 - 1.0);
    if (s1 == 0.0 && s0 == 0.0) return std::numeric_limits<double>::infinity();
    return std::fabs(std::log(s1 / s0));
}

bool all_equal(const std::vector<double>& y) {
    for (double v : y)
        if (v != y.front()) return false;
    return true;
}

TestResult degenerate_result(test_method method, double statistic, std::uint64_t total) {
    TestResult t;
    t.method = method;
    t.statistic = statistic;
    t.p_value = 1.0;
    t.degenerate = true;
    t.extreme_count = total;
    t.total_count = total;
    return t;
}

TestResult normal_z_result(test_method method, double tau_hat, double variance) {
    TestResult t;
    t.method = method;
    if (variance <= 0.0) {
        t.degenerate = true;
        t.statistic = tau_hat == 0.0
                          ? 0.0
                          : std::copysign(std::numeric_limits<double>::infinity(), tau_hat);
        t.p_value = tau_hat == 0.0 ? 1.0 : 0.0;
        return t;
    }
    t.statistic = tau_hat / std::sqrt(variance);
    t.p_value = two_sided_normal_p(t.statistic);
    return t;
}

} // namespace

TestResult neyman_test(const VarianceReport& r) {
    return normal_z_result(test_method::neyman, r.tau_hat, r.v_neyman);
}

TestResult neyman_test(const ObservedData& d) { return neyman_test(variance_report(d)); }

double variance_ratio_statistic(const ObservedData& d) {
    const auto r = variance_report(d);
    if (r.s0sq == 0.0)
        throw data_error("variance_ratio_statistic: control arm variance is zero");
    return r.s1sq / r.s0sq;
}

TestResult frt_monte_carlo(const ObservedData& d, frt_statistic stat, std::uint64_t m,
                           rng& g, frt_options opt) {
    if (m == 0) throw std::invalid_argument("frt_monte_carlo: need m >= 1");
    const bool ratio = (stat == frt_statistic::variance_ratio);
    if (d.n1 == 0 || d.n0 == 0) throw data_error("frt_monte_carlo: an arm is empty");

    const double n1 = static_cast<double>(d.n1), n0 = static_cast<double>(d.n0);
    const double total = total_sum(d.y);
    const double sumsq = ratio ? total_sumsq(d.y) : 0.0;

    const auto obs_idx = sorted_treated_indices(d);
    double obs_ts = 0, obs_tq = 0;
    for (std::size_t i : obs_idx) {
        obs_ts += d.y[i];
        if (ratio) obs_tq += d.y[i] * d.y[i];
    }

    const test_method method = ratio ? test_method::frt_var_ratio : test_method::frt_mc;
    double obs_kappa; // two-sided extremeness of the observed statistic
    double obs_stat;
    if (ratio) {
        const auto vr = variance_report(d); // enforces >= 2 units per arm
        if (vr.s0sq == 0.0)
            throw data_error("frt_monte_carlo: control arm variance is zero");
        obs_stat = vr.s1sq / vr.s0sq;
        obs_kappa = ratio_extremeness(obs_ts, obs_tq, total, sumsq, n1, n0);
    } else {
        obs_stat = diff_stat(obs_ts, total, n1, n0);
        obs_kappa = std::fabs(obs_stat);
    }

    if (all_equal(d.y)) {
        auto t = degenerate_result(method, obs_stat, m);
        t.m_draws = m;
        if (opt.add_one) {
            t.extreme_count = m + 1;
            t.total_count = m + 1;
        }
        return t;
    }

    // partial Fisher-Yates over a reusable value pool: after each pass the
    // first n1 entries are a uniform treated sample regardless of prior order
    std::vector<double> pool = d.y;
    const std::size_t n = d.size(), k = d.n1;
    std::uint64_t extreme = 0;
    for (std::uint64_t rep = 0; rep < m; ++rep) {
        double ts = 0, tq = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(g.below(n - i));
            std::swap(pool[i], pool[j]);
            ts += pool[i];
            if (ratio) tq += pool[i] * pool[i];
        }
        const double kappa = ratio
                                 ? ratio_extremeness(ts, tq, total, sumsq, n1, n0)
                                 : std::fabs(diff_stat(ts, total, n1, n0));
        if (!(kappa < obs_kappa)) ++extreme; // ties and NaN-proof: >= semantics
    }

    TestResult t;
    t.method = method;
    t.statistic = obs_stat;
    t.m_draws = m;
    if (opt.add_one) {
        // the observed assignment always matches its own statistic
        t.extreme_count = extreme + 1;
        t.total_count = m + 1;
    } else {
        t.extreme_count = extreme;
        t.total_count = m;
    }
    t.p_value = static_cast<double>(t.extreme_count) / static_cast<double>(t.total_count);
    return t;
}

TestResult frt_exact(const ObservedData& d, frt_statistic stat, std::uint64_t cap) {
    const bool ratio = (stat == frt_statistic::variance_ratio);
    const double n1 = static_cast<double>(d.n1), n0 = static_cast<double>(d.n0);
    if (d.n1 == 0 || d.n0 == 0) throw data_error("frt_exact: an arm is empty");
    if (ratio && (d.n1 < 2 || d.n0 < 2))
        throw data_error("frt_exact: variance ratio needs 2 units per arm");

    const double total = total_sum(d.y);
    const double sumsq = ratio ? total_sumsq(d.y) : 0.0;

    const auto obs_idx = sorted_treated_indices(d);
    double obs_ts = 0, obs_tq = 0;
    for (std::size_t i : obs_idx) {
        obs_ts += d.y[i];
        if (ratio) obs_tq += d.y[i] * d.y[i];
    }
    double obs_kappa, obs_stat;
    if (ratio) {
        const auto vr = variance_report(d);
        if (vr.s0sq == 0.0) throw data_error("frt_exact: control arm variance is zero");
        obs_stat = vr.s1sq / vr.s0sq;
        obs_kappa = ratio_extremeness(obs_ts, obs_tq, total, sumsq, n1, n0);
    } else {
        obs_stat = diff_stat(obs_ts, total, n1, n0);
        obs_kappa = std::fabs(obs_stat);
    }

    const test_method method = ratio ? test_method::frt_var_ratio : test_method::frt_exact;
    if (all_equal(d.y)) {
        crd_enumerator probe(d.size(), d.n1, cap); // still refuse oversized spaces
        return degenerate_result(method, obs_stat, probe.count());
    }

    // TODO: partition the rank range across workers via crd_enumerator::seek
    // when counts approach the cap; a single pass suffices at default sizes.
    std::uint64_t extreme = 0, count = 0;
    crd_enumerator e(d.size(), d.n1, cap);
    for (; !e.done(); e.advance(), ++count) {
        double ts = 0, tq = 0;
        for (std::size_t i : e.treated()) {
            ts += d.y[i];
            if (ratio) tq += d.y[i] * d.y[i];
        }
        const double kappa = ratio
                                 ? ratio_extremeness(ts, tq, total, sumsq, n1, n0)
                                 : std::fabs(diff_stat(ts, total, n1, n0));
        if (!(kappa < obs_kappa)) ++extreme;
    }

    TestResult t;
    t.method = method;
    t.statistic = obs_stat;
    t.extreme_count = extreme;
    t.total_count = count;
    t.p_value = static_cast<double>(extreme) / static_cast<double>(count);
    return t;
}

IntervalResult neyman_interval(const VarianceReport& r, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("neyman_interval: level must lie in (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const double half = z * std::sqrt(r.v_neyman);
    IntervalResult out;
    out.method = interval_method::neyman;
    out.level = level;
    out.lower = r.tau_hat - half;
    out.upper = r.tau_hat + half;
    return out;
}

IntervalResult neyman_interval(const ObservedData& d, double level) {
    return neyman_interval(variance_report(d), level);
}

IntervalResult fiducial_interval(const ObservedData& d, double level, std::uint64_t m,
                                 rng& g, fiducial_options opt) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("fiducial_interval: level must lie in (0,1)");
    const auto rep = variance_report(d);
    if (rep.v_neyman <= 0.0)
        throw data_error("fiducial_interval: zero variance, search box degenerate");
    const double n1 = static_cast<double>(d.n1), n0 = static_cast<double>(d.n0);
    const double n = n1 + n0;
    const double total = total_sum(d.y);

    const auto obs_idx = sorted_treated_indices(d);
    double obs_ts = 0;
    for (std::size_t i : obs_idx) obs_ts += d.y[i];
    const double obs_stat = diff_stat(obs_ts, total, n1, n0);

    /* Under the constant-shift null with shift c, the adjusted outcomes are
     * y - c*t, so a re-assignment's statistic is stat - c*h where h depends
     * only on how many observed-treated units it treats; the observed
     * assignment has h = 1. One draw set therefore serves every c. */
    std::vector<double> stats;
    std::vector<double> hs;
    auto h_of = [&](double overlap) { return (n / (n1 * n0)) * overlap - n1 / n0; };
    if (opt.exact) {
        crd_enumerator e(d.size(), d.n1, opt.cap);
        stats.reserve(e.count());
        hs.reserve(e.count());
        for (; !e.done(); e.advance()) {
            double ts = 0, overlap = 0;
            for (std::size_t i : e.treated()) {
                ts += d.y[i];
                overlap += d.t[i];
            }
            stats.push_back(diff_stat(ts, total, n1, n0));
            hs.push_back(h_of(overlap));
        }
    } else {
        if (m == 0) throw std::invalid_argument("fiducial_interval: need m >= 1");
        stats.reserve(m + opt.add_one);
        hs.reserve(m + opt.add_one);
        std::vector<std::size_t> pool(d.size());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::uint64_t repn = 0; repn < m; ++repn) {
            double ts = 0, overlap = 0;
            for (std::size_t i = 0; i < d.n1; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(g.below(d.size() - i));
                std::swap(pool[i], pool[j]);
                ts += d.y[pool[i]];
                overlap += d.t[pool[i]];
            }
            stats.push_back(diff_stat(ts, total, n1, n0));
            hs.push_back(h_of(overlap));
        }
        if (opt.add_one) {
            stats.push_back(obs_stat);
            hs.push_back(1.0);
        }
    }

    const double alpha = 1.0 - level;
    const auto m_total = static_cast<double>(stats.size());
    auto retained = [&](double c) {
        const double threshold = std::fabs(obs_stat - c);
        std::uint64_t extreme = 0;
        for (std::size_t j = 0; j < stats.size(); ++j)
            if (!(std::fabs(stats[j] - c * hs[j]) < threshold)) ++extreme;
        return static_cast<double>(extreme) / m_total > alpha;
    };

    const double sd = std::sqrt(rep.v_neyman);
    const double halfwidth = opt.search_halfwidth_sds * sd;
    const int gp = std::max(opt.grid_points, 3);
    std::vector<double> grid(gp);
    std::vector<char> keep(gp);
    const double lo_box = rep.tau_hat - halfwidth;
    const double step = 2.0 * halfwidth / static_cast<double>(gp - 1);
    int first = -1, last = -1;
    bool contiguous = true;
    for (int i = 0; i < gp; ++i) {
        grid[i] = lo_box + step * static_cast<double>(i);
        keep[i] = retained(grid[i]) ? 1 : 0;
        if (keep[i]) {
            if (first < 0) first = i;
            last = i;
        }
    }
    for (int i = first; first >= 0 && i <= last; ++i)
        if (!keep[i]) contiguous = false;

    IntervalResult out;
    out.method = interval_method::fiducial;
    out.level = level;
    out.m_draws = opt.exact ? 0 : m;
    out.hull_violation = !contiguous;
    if (first < 0) {
        out.empty = true;
        out.lower = out.upper = rep.tau_hat;
        return out;
    }

    const double tol = 1e-4 * sd;
    auto bisect_edge = [&](double outside, double inside) {
        while (std::fabs(inside - outside) > tol) {
            const double mid = 0.5 * (inside + outside);
            (retained(mid) ? inside : outside) = mid;
        }
        return inside;
    };

    if (first == 0) {
        out.lower = grid.front();
        out.truncated = true;
    } else {
        out.lower = bisect_edge(grid[first - 1], grid[first]);
    }
    if (last == gp - 1) {
        out.upper = grid.back();
        out.truncated = true;
    } else {
        out.upper = bisect_edge(grid[last + 1], grid[last]);
    }
    return out;
}

PairTestResults pair_tests(const PairEffectReport& rep, rng& g, pair_frt_mode mode,
                           std::uint64_t m) {
    const std::size_t n = rep.per_pair.size();
    if (n < 2) throw data_error("pair_tests: need at least 2 pairs");

    PairTestResults out;
    out.neyman = normal_z_result(test_method::pair_neyman, rep.tau_hat, rep.v_neyman);

    if (mode == pair_frt_mode::auto_select)
        mode = n <= 20 ? pair_frt_mode::exhaustive : pair_frt_mode::monte_carlo;

    const double fn = static_cast<double>(n);
    bool all_zero = true;
    for (double v : rep.per_pair)
        if (v != 0.0) all_zero = false;

    if (mode == pair_frt_mode::normal_approx) {
        out.fisher = normal_z_result(test_method::pair_frt, rep.tau_hat, rep.v_fisher);
        return out;
    }

    // observed statistic through the same summation the flips use
    double obs_sum = 0;
    for (double v : rep.per_pair) obs_sum += v;
    const double obs_abs = std::fabs(obs_sum);

    TestResult f;
    f.method = test_method::pair_frt;
    f.statistic = obs_sum / fn;

    if (all_zero) {
        const std::uint64_t total = mode == pair_frt_mode::exhaustive
                                        ? (std::uint64_t{1} << n)
                                        : m;
        out.fisher = degenerate_result(test_method::pair_frt, 0.0, total);
        out.fisher.m_draws = mode == pair_frt_mode::monte_carlo ? m : 0;
        return out;
    }

    if (mode == pair_frt_mode::exhaustive) {
        if (n > 62) throw data_error("pair_tests: exhaustive mode needs n_pairs <= 62");
        const std::uint64_t total = std::uint64_t{1} << n;
        if (total > defaults::enumeration_cap)
            throw enumeration_cap_error(total, defaults::enumeration_cap);
        std::uint64_t extreme = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i)
                s += ((mask >> i) & 1u) ? -rep.per_pair[i] : rep.per_pair[i];
            if (!(std::fabs(s) < obs_abs)) ++extreme;
        }
        f.extreme_count = extreme;
        f.total_count = total;
        f.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    } else {
        if (m == 0) throw std::invalid_argument("pair_tests: need m >= 1");
        std::uint64_t extreme = 0;
        std::uint64_t bits = 0;
        int bits_left = 0;
        for (std::uint64_t rep_i = 0; rep_i < m; ++rep_i) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (bits_left == 0) {
                    bits = g.next();
                    bits_left = 64;
                }
                s += (bits & 1u) ? -rep.per_pair[i] : rep.per_pair[i];
                bits >>= 1;
                --bits_left;
            }
            if (!(std::fabs(s) < obs_abs)) ++extreme;
        }
        f.extreme_count = extreme;
        f.total_count = m;
        f.m_draws = m;
        f.p_value = static_cast<double>(extreme) / static_cast<double>(m);
    }
    out.fisher = f;
    return out;
}

FactorialTestResults factorial_tests(const FactorialEffectReport& rep,
                                     const FactorialObservedData& d,
                                     const std::vector<int>& contrast, std::uint64_t m,
                                     rng& g) {
    const std::size_t cells = d.cells();
    if (contrast.size() != cells)
        throw std::invalid_argument("factorial_tests: contrast length != cell count");
    if (m == 0) throw std::invalid_argument("factorial_tests: need m >= 1");

    FactorialTestResults out;
    out.neyman = normal_z_result(test_method::factorial_neyman, rep.effect, rep.v_neyman);

    if (all_equal(d.y)) {
        out.fisher = degenerate_result(test_method::factorial_frt, rep.effect, m);
        out.fisher.m_draws = m;
        return out;
    }

    const double half_scale = std::pow(2.0, d.k - 1);
    const double fr = static_cast<double>(d.r);
    const double obs_abs = std::fabs(rep.effect);

    std::vector<double> pool = d.y;
    const std::size_t n = d.size();
    std::uint64_t extreme = 0;
    for (std::uint64_t rep_i = 0; rep_i < m; ++rep_i) {
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(g.below(i + 1));
            std::swap(pool[i], pool[j]);
        }
        double dot = 0;
        std::size_t pos = 0;
        for (std::size_t c = 0; c < cells; ++c) {
            double block = 0;
            for (std::size_t u = 0; u < d.r; ++u) block += pool[pos++];
            dot += contrast[c] * (block / fr);
        }
        const double stat = dot / half_scale;
        if (!(std::fabs(stat) < obs_abs)) ++extreme;
    }

    TestResult f;
    f.method = test_method::factorial_frt;
    f.statistic = rep.effect;
    f.extreme_count = extreme;
    f.total_count = m;
    f.m_draws = m;
    f.p_value = static_cast<double>(extreme) / static_cast<double>(m);
    out.fisher = f;
    return out;
}

} // namespace randinf
