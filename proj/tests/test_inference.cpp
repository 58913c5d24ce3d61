#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "randinf/design.hpp"
#include "randinf/errors.hpp"
#include "randinf/estimators.hpp"
#include "randinf/inference.hpp"
#include "randinf/normal.hpp"
#include "randinf/population.hpp"
#include "randinf/rng.hpp"

using namespace randinf;

namespace {

ObservedData four_unit_data() { return make_observed({0, 1, 2, 3}, {1, 1, 0, 0}); }

/// Exact randomization p for the mean difference, computed the slow way.
double oracle_exact_p(const ObservedData& d) {
    // under the sharp null the full table is (y, y)
    const double obs = std::abs(oracle::observed_diff(
        d.y, d.y, d.t));
    std::size_t extreme = 0, total = 0;
    for (const auto& labels : oracle::all_label_vectors(d.y.size(), d.n1)) {
        const double stat = std::abs(oracle::observed_diff(d.y, d.y, labels));
        if (!(stat < obs)) ++extreme;
        ++total;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

} // namespace

TEST_CASE("normal-approximation test on the four-unit example") {
    const auto t = neyman_test(four_unit_data());
    CHECK(t.method == test_method::neyman);
    CHECK(t.statistic == doctest::Approx(-2.82842712474619).epsilon(1e-13));
    CHECK(t.p_value == doctest::Approx(0.004677734981047271).epsilon(1e-12));
    CHECK(t.m_draws == 0);
    CHECK_FALSE(t.degenerate);
    CHECK(t.reject_at(0.05));
    CHECK_FALSE(t.reject_at(0.004));

    // the report-based overload is the same computation
    const auto t2 = neyman_test(variance_report(four_unit_data()));
    CHECK(t2.statistic == t.statistic);
    CHECK(t2.p_value == t.p_value);
}

TEST_CASE("exact randomization test on the four-unit example") {
    const auto t = frt_exact(four_unit_data(), frt_statistic::diff_in_means);
    CHECK(t.method == test_method::frt_exact);
    CHECK(t.statistic == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(t.extreme_count == 2);
    CHECK(t.total_count == 6);
    CHECK(t.p_value == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
    CHECK_FALSE(t.degenerate);

    // the paradox in miniature: the randomization test keeps the sharp null
    // while the normal-approximation test rejects the mean null
    CHECK_FALSE(t.reject_at(0.05));
    CHECK(neyman_test(four_unit_data()).reject_at(0.05));
}

TEST_CASE("exact randomization test matches a brute-force oracle") {
    auto g = rng::stream(53, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(g.below(4)); // 6..9
        const std::size_t n1 = 2 + static_cast<std::size_t>(g.below(n - 3));
        // small integers keep every arm sum exact, so statistic ties are
        // genuine ties in both implementations
        std::vector<double> y(n);
        for (auto& v : y) v = static_cast<double>(g.below(10));
        std::vector<std::uint8_t> t(n, 0);
        for (std::size_t i = 0; i < n1; ++i) t[i] = 1;
        const auto d = make_observed(y, t);

        const auto r = frt_exact(d, frt_statistic::diff_in_means);
        CHECK(r.p_value == doctest::Approx(oracle_exact_p(d)).epsilon(1e-12));
        CHECK(r.total_count == binomial_coefficient(n, n1));
        CHECK(r.extreme_count >= 1); // observed assignment always ties itself
    }
}

TEST_CASE("exact p-values are valid under the sharp null") {
    // With the observed data fixed, re-label every possible assignment as the
    // observed one: the fraction of assignments with p <= a never exceeds a.
    auto g = rng::stream(59, 0);
    std::vector<double> y(8);
    for (auto& v : y) v = g.normal();

    std::vector<double> pvals;
    for (crd_enumerator e(8, 4); !e.done(); e.advance()) {
        const auto d = make_observed(y, e.assignment().labels);
        pvals.push_back(frt_exact(d, frt_statistic::diff_in_means).p_value);
    }
    REQUIRE(pvals.size() == 70);
    for (int k = 1; k <= 70; ++k) {
        const double a = k / 70.0;
        std::size_t hits = 0;
        for (double p : pvals) hits += p <= a + 1e-12;
        CHECK(static_cast<double>(hits) / 70.0 <= a + 1e-12);
    }
}

TEST_CASE("Monte Carlo randomization test converges to the exact answer") {
    auto g = rng::stream(61, 0);
    std::vector<double> y(10);
    for (auto& v : y) v = g.normal();
    std::vector<std::uint8_t> t(10, 0);
    for (std::size_t i = 0; i < 5; ++i) t[i] = 1;
    const auto d = make_observed(y, t);

    const double exact = frt_exact(d, frt_statistic::diff_in_means).p_value;
    const auto mc = frt_monte_carlo(d, frt_statistic::diff_in_means, 20000, g);
    CHECK(mc.method == test_method::frt_mc);
    CHECK(mc.m_draws == 20000);
    // 4 binomial standard errors
    CHECK(std::abs(mc.p_value - exact) < 4 * std::sqrt(exact * (1 - exact) / 20000) + 1e-9);
    CHECK(mc.p_value == doctest::Approx(static_cast<double>(mc.extreme_count) / 20000)
                            .epsilon(1e-15));
}

TEST_CASE("optional add-one tally shifts the Monte Carlo p-value as documented") {
    const auto d = four_unit_data();
    auto g1 = rng::stream(67, 0), g2 = rng::stream(67, 0);
    const auto plain = frt_monte_carlo(d, frt_statistic::diff_in_means, 5000, g1);
    frt_options opt;
    opt.add_one = true;
    const auto padded = frt_monte_carlo(d, frt_statistic::diff_in_means, 5000, g2, opt);
    // same seed, same draws; the observed assignment joins the tally once
    CHECK(padded.extreme_count == plain.extreme_count + 1);
    CHECK(padded.total_count == 5001);
    CHECK(plain.p_value ==
          doctest::Approx(static_cast<double>(plain.extreme_count) / 5000).epsilon(1e-15));
    CHECK(padded.p_value ==
          doctest::Approx(static_cast<double>(padded.extreme_count) / 5001).epsilon(1e-15));
    CHECK(padded.p_value > 0); // add-one can never report zero
}

TEST_CASE("constant outcomes degenerate to p = 1") {
    const auto d = make_observed({3, 3, 3, 3}, {1, 1, 0, 0});
    auto g = rng::stream(71, 0);
    const auto mc = frt_monte_carlo(d, frt_statistic::diff_in_means, 100, g);
    CHECK(mc.degenerate);
    CHECK(mc.p_value == 1.0);
    const auto ex = frt_exact(d, frt_statistic::diff_in_means);
    CHECK(ex.degenerate);
    CHECK(ex.p_value == 1.0);
}

TEST_CASE("variance-ratio statistic and its randomization test") {
    const auto d = make_observed({0, 8, 2, 3, 2.5, 2.2}, {1, 1, 0, 0, 0, 0});
    const auto vr = variance_report(d);
    CHECK(variance_ratio_statistic(d) == doctest::Approx(vr.s1sq / vr.s0sq).epsilon(1e-14));

    const auto ex = frt_exact(d, frt_statistic::variance_ratio);
    CHECK(ex.method == test_method::frt_var_ratio);
    CHECK(ex.total_count == 15);
    CHECK(ex.extreme_count >= 1);
    CHECK(ex.p_value > 0);
    CHECK(ex.p_value <= 1);

    const auto flat0 = make_observed({1, 2, 5, 5}, {1, 1, 0, 0});
    CHECK_THROWS_AS((void)variance_ratio_statistic(flat0), data_error);
}

TEST_CASE("normal-approximation p-values order by the variance estimate used") {
    auto g = rng::stream(73, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(g.below(20));
        const std::size_t n1 = 2 + static_cast<std::size_t>(g.below(n - 3));
        std::vector<double> y(n);
        for (auto& v : y) v = g.normal() + 0.3;
        std::vector<std::uint8_t> t(n, 0);
        for (std::size_t i = 0; i < n1; ++i) t[i] = 1;
        const auto vr = variance_report(make_observed(y, t));
        if (vr.tau_hat == 0) continue;

        // z tests with a larger variance are less significant, so the
        // pooled-variance route disagrees with the two-sample route exactly
        // when the variances disagree
        const double z_n = vr.tau_hat / std::sqrt(vr.v_neyman);
        const double z_f = vr.tau_hat / std::sqrt(vr.v_fisher);
        const double p_n = two_sided_normal_p(z_n);
        const double p_f = two_sided_normal_p(z_f);
        if (vr.v_fisher > vr.v_neyman)
            CHECK(p_f >= p_n);
        else if (vr.v_fisher < vr.v_neyman)
            CHECK(p_f <= p_n);
    }
}

TEST_CASE("normal-approximation interval on the four-unit example") {
    const auto ci = neyman_interval(four_unit_data(), 0.95);
    CHECK(ci.method == interval_method::neyman);
    CHECK(ci.level == 0.95);
    CHECK(ci.lower == doctest::Approx(-3.3859038243496773).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(-0.6140961756503225).epsilon(1e-12));
    CHECK_FALSE(ci.truncated);
    CHECK(ci.width() == doctest::Approx(2 * 1.3859038243496775).epsilon(1e-12));
}

TEST_CASE("test inversion truncates when no shift can be rejected") {
    // with 6 assignments the smallest exact p is 1/6 > 0.05, so every shift
    // is retained and the interval is the whole search box
    const auto d = four_unit_data();
    auto g = rng::stream(79, 0);
    fiducial_options opt;
    opt.exact = true;
    const auto iv = fiducial_interval(d, 0.95, 0, g, opt);
    CHECK(iv.method == interval_method::fiducial);
    CHECK(iv.truncated);
    CHECK_FALSE(iv.empty);
    const double half = 10.0 * std::sqrt(0.5);
    CHECK(iv.lower == doctest::Approx(-2.0 - half).epsilon(1e-9));
    CHECK(iv.upper == doctest::Approx(-2.0 + half).epsilon(1e-9));
}

TEST_CASE("exact test inversion gives a finite interval containing the estimate") {
    auto g = rng::stream(83, 0);
    std::vector<double> y(8);
    for (auto& v : y) v = g.normal() * 0.5;
    y[0] += 2.0; // clear effect among the treated
    y[1] += 2.0;
    std::vector<std::uint8_t> t = {1, 1, 1, 1, 0, 0, 0, 0};
    const auto d = make_observed(y, t);
    const auto vr = variance_report(d);

    fiducial_options opt;
    opt.exact = true;
    const auto iv = fiducial_interval(d, 0.9, 0, g, opt); // min exact p = 1/70 < 0.1
    CHECK_FALSE(iv.truncated);
    CHECK_FALSE(iv.empty);
    CHECK_FALSE(iv.hull_violation);
    CHECK(iv.lower < vr.tau_hat);
    CHECK(iv.upper > vr.tau_hat);
    CHECK(iv.width() < 2 * 10.0 * std::sqrt(vr.v_neyman));

    // Monte Carlo inversion lands near the exact endpoints
    auto g2 = rng::stream(83, 1);
    const auto mc = fiducial_interval(d, 0.9, 20000, g2);
    CHECK_FALSE(mc.empty);
    CHECK(mc.lower < vr.tau_hat);
    CHECK(mc.upper > vr.tau_hat);
    CHECK(std::abs(mc.lower - iv.lower) < 0.25 * iv.width());
    CHECK(std::abs(mc.upper - iv.upper) < 0.25 * iv.width());
}

TEST_CASE("pair tests on the two-pair example") {
    PairObservedData d;
    d.first = {5, 0};
    d.second = {4, 3};
    d.first_treated = {1, 0};
    const auto rep = pair_report(d);

    auto g = rng::stream(89, 0);
    const auto both = pair_tests(rep, g); // auto -> exhaustive at 2 pairs
    CHECK(both.neyman.method == test_method::pair_neyman);
    CHECK(both.neyman.statistic == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(both.neyman.p_value == doctest::Approx(0.04550026389635844).epsilon(1e-12));

    CHECK(both.fisher.method == test_method::pair_frt);
    CHECK(both.fisher.total_count == 4);
    CHECK(both.fisher.extreme_count == 2); // (+,+) and (-,-) reach |2|
    CHECK(both.fisher.p_value == doctest::Approx(0.5).epsilon(1e-15));

    // again the two tests disagree at the 5% line
    CHECK(both.neyman.reject_at(0.05));
    CHECK_FALSE(both.fisher.reject_at(0.05));

    // normal approximation to the sign-flip distribution uses the other variance
    auto g2 = rng::stream(89, 1);
    const auto na = pair_tests(rep, g2, pair_frt_mode::normal_approx);
    CHECK(na.fisher.statistic == doctest::Approx(1.2649110640673518).epsilon(1e-13));
    CHECK(na.fisher.p_value == doctest::Approx(0.20590321073206833).epsilon(1e-12));

    // Monte Carlo agrees with the exhaustive answer
    auto g3 = rng::stream(89, 2);
    const auto mc = pair_tests(rep, g3, pair_frt_mode::monte_carlo, 40000);
    CHECK(mc.fisher.m_draws == 40000);
    CHECK(std::abs(mc.fisher.p_value - 0.5) < 4 * std::sqrt(0.25 / 40000));
}

TEST_CASE("pair sign-flip test is exhaustive up to the cutoff and sampled beyond") {
    auto g = rng::stream(97, 0);
    PairObservedData d;
    const std::size_t np = 21;
    d.first.resize(np);
    d.second.resize(np);
    d.first_treated.assign(np, 1);
    for (std::size_t i = 0; i < np; ++i) {
        d.first[i] = g.normal() + 0.3;
        d.second[i] = g.normal();
    }
    const auto rep = pair_report(d);

    PairObservedData d20 = d;
    d20.first.resize(20);
    d20.second.resize(20);
    d20.first_treated.resize(20);
    const auto rep20 = pair_report(d20);

    auto ga = rng::stream(97, 1);
    const auto at20 = pair_tests(rep20, ga);
    CHECK(at20.fisher.m_draws == 0);
    CHECK(at20.fisher.total_count == (1ull << 20));

    auto gb = rng::stream(97, 2);
    const auto at21 = pair_tests(rep, gb, pair_frt_mode::auto_select, 5000);
    CHECK(at21.fisher.m_draws == 5000);
}

TEST_CASE("degenerate pair data yields p = 1") {
    PairObservedData d;
    d.first = {2, 2};
    d.second = {2, 2};
    d.first_treated = {1, 0};
    const auto rep = pair_report(d);
    auto g = rng::stream(101, 0);
    const auto both = pair_tests(rep, g);
    CHECK(both.neyman.degenerate);
    CHECK(both.neyman.p_value == 1.0);
    CHECK(both.fisher.degenerate);
    CHECK(both.fisher.p_value == 1.0);
}

TEST_CASE("factorial tests separate a real effect from a null factor") {
    const double h = std::sqrt(0.5);
    FactorialObservedData d;
    d.k = 2;
    d.r = 2;
    d.y = {5 + h, 5 - h, 3 + h, 3 - h, 2 + h, 2 - h, 0 + h, 0 - h};
    d.cell = {0, 0, 1, 1, 2, 2, 3, 3};
    FactorialTable zeros(2, 2, std::vector<double>(32, 0.0));
    const auto rep = factorial_report(d, zeros.main_effect_contrast(1));

    auto g = rng::stream(103, 0);
    const auto both = factorial_tests(rep, d, zeros.main_effect_contrast(1), 20000, g);
    CHECK(both.neyman.method == test_method::factorial_neyman);
    CHECK(both.neyman.statistic == doctest::Approx(4.242640687119285).epsilon(1e-13));
    CHECK(both.neyman.p_value == doctest::Approx(2.2090496998585502e-05).epsilon(1e-11));
    CHECK(both.fisher.method == test_method::factorial_frt);
    CHECK(both.fisher.m_draws == 20000);
    CHECK(both.fisher.p_value < 0.15); // strong effect, small p

    // determinism: same stream index, same answer
    auto g2 = rng::stream(103, 0);
    const auto again = factorial_tests(rep, d, zeros.main_effect_contrast(1), 20000, g2);
    CHECK(again.fisher.p_value == both.fisher.p_value);
}

TEST_CASE("enumeration refuses data beyond the cap") {
    std::vector<double> y(44);
    std::vector<std::uint8_t> t(44, 0);
    for (std::size_t i = 0; i < 22; ++i) t[i] = 1;
    for (std::size_t i = 0; i < 44; ++i) y[i] = static_cast<double>(i % 7);
    const auto d = make_observed(y, t);
    CHECK_THROWS_AS((void)frt_exact(d, frt_statistic::diff_in_means),
                    enumeration_cap_error);
}
