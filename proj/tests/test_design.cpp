#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "randinf/design.hpp"
#include "randinf/errors.hpp"
#include "randinf/rng.hpp"

using namespace randinf;

TEST_CASE("binomial coefficients are exact and saturate on overflow") {
    CHECK(binomial_coefficient(0, 0) == 1);
    CHECK(binomial_coefficient(4, 2) == 6);
    CHECK(binomial_coefficient(10, 5) == 252);
    CHECK(binomial_coefficient(12, 6) == 924);
    CHECK(binomial_coefficient(40, 20) == 137846528820ull);
    CHECK(binomial_coefficient(52, 26) == 495918532948104ull);
    CHECK(binomial_coefficient(64, 32) == 1832624140942590534ull);
    CHECK(binomial_coefficient(7, 0) == 1);
    CHECK(binomial_coefficient(7, 7) == 1);
    CHECK(binomial_coefficient(5, 6) == 0);
    // C(68,34) ~ 2.8e19 exceeds 64 bits
    CHECK(binomial_coefficient(68, 34) == UINT64_MAX);
    CHECK(binomial_coefficient(200, 100) == UINT64_MAX);
}

TEST_CASE("enumerator walks treated sets in lexicographic order") {
    crd_enumerator e(4, 2);
    CHECK(e.count() == 6);
    const std::vector<std::vector<std::size_t>> want = {
        {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    std::size_t i = 0;
    for (; !e.done(); e.advance(), ++i) {
        REQUIRE(i < want.size());
        CHECK(e.treated() == want[i]);
        CHECK(e.rank() == i);
    }
    CHECK(i == 6);
    CHECK_FALSE(e.advance()); // stays done
}

TEST_CASE("enumerator covers every assignment exactly once") {
    const std::size_t n = 7, n1 = 3;
    std::set<std::vector<std::uint8_t>> seen;
    for (crd_enumerator e(n, n1); !e.done(); e.advance()) {
        const auto a = e.assignment();
        CHECK(a.n1 == n1);
        std::size_t ones = 0;
        for (auto v : a.labels) ones += v;
        CHECK(ones == n1);
        seen.insert(a.labels);
    }
    const auto all = oracle::all_label_vectors(n, n1);
    CHECK(seen.size() == all.size());
    for (const auto& labels : all) CHECK(seen.count(labels) == 1);
}

TEST_CASE("seek repositions the enumerator by rank") {
    const std::size_t n = 10, n1 = 4;
    std::vector<std::vector<std::size_t>> by_rank;
    for (crd_enumerator e(n, n1); !e.done(); e.advance()) by_rank.push_back(e.treated());
    REQUIRE(by_rank.size() == 210);

    for (std::uint64_t r : {0ull, 1ull, 73ull, 137ull, 209ull}) {
        crd_enumerator e(n, n1);
        e.seek(r);
        CHECK_FALSE(e.done());
        CHECK(e.rank() == r);
        CHECK(e.treated() == by_rank[static_cast<std::size_t>(r)]);
        // advancing from a seeked position continues the walk
        if (r + 1 < 210) {
            e.advance();
            CHECK(e.treated() == by_rank[static_cast<std::size_t>(r + 1)]);
        }
    }
    crd_enumerator e(n, n1);
    e.seek(210);
    CHECK(e.done());
}

TEST_CASE("random CRD draws are uniform over all assignments") {
    const std::size_t n = 6, n1 = 3, draws = 1000000;
    std::map<std::vector<std::uint8_t>, std::size_t> counts;
    for (crd_enumerator e(n, n1); !e.done(); e.advance()) counts[e.assignment().labels] = 0;
    REQUIRE(counts.size() == 20);

    auto g = rng::stream(101, 0);
    std::vector<double> unit_ones(n, 0);
    double t0t1 = 0;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto a = draw_crd(n, n1, g);
        auto it = counts.find(a.labels);
        REQUIRE(it != counts.end());
        ++it->second;
        for (std::size_t i = 0; i < n; ++i) unit_ones[i] += a.labels[i];
        t0t1 += a.labels[0] * a.labels[1];
    }

    // Goodness of fit over the 20 cells; 43.82 is the df=19 99.9th percentile.
    double chi2 = 0;
    const double expect = static_cast<double>(draws) / 20.0;
    for (const auto& kv : counts) {
        const double dlt = static_cast<double>(kv.second) - expect;
        chi2 += dlt * dlt / expect;
    }
    CHECK(chi2 < 43.82);

    // Marginal moments of the treatment indicators.
    for (std::size_t i = 0; i < n; ++i) {
        const double rate = unit_ones[i] / draws;
        CHECK(std::abs(rate - 0.5) < 4 * 0.0005); // 4 se, se = sqrt(.25/1e6)
    }
    // E(T_0 T_1) = n1(n1-1)/(n(n-1)) = 0.2, so cov = -0.05 here.
    const double cov01 = t0t1 / draws - (unit_ones[0] / draws) * (unit_ones[1] / draws);
    CHECK(std::abs(cov01 - (-0.05)) < 4 * 0.0004);
}

TEST_CASE("pair flips are independent fair coins") {
    const std::size_t n_pairs = 10, draws = 100000;
    auto g = rng::stream(102, 0);
    std::vector<double> ones(n_pairs, 0);
    double pair01 = 0;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto a = draw_pairs(n_pairs, g);
        REQUIRE(a.n_pairs() == n_pairs);
        for (std::size_t i = 0; i < n_pairs; ++i) ones[i] += a.first_treated[i];
        pair01 += a.first_treated[0] * a.first_treated[1];
    }
    for (std::size_t i = 0; i < n_pairs; ++i)
        CHECK(std::abs(ones[i] / draws - 0.5) < 4 * std::sqrt(0.25 / draws));
    // independence across pairs: E(F_0 F_1) = 1/4
    CHECK(std::abs(pair01 / draws - 0.25) < 4 * std::sqrt(0.1875 / draws));

    auto g1 = rng::stream(7, 3), g2 = rng::stream(7, 3);
    CHECK(draw_pairs(5, g1).first_treated == draw_pairs(5, g2).first_treated);
}

TEST_CASE("two-cell factorial draws follow the completely randomized law") {
    // k=1, r=3 splits 6 units into two cells of 3: same law as CRD(6, 3).
    const std::size_t draws = 100000;
    auto g = rng::stream(103, 0);
    std::map<std::vector<std::uint8_t>, std::size_t> counts;
    for (crd_enumerator e(6, 3); !e.done(); e.advance()) counts[e.assignment().labels] = 0;

    for (std::size_t d = 0; d < draws; ++d) {
        const auto a = draw_factorial(1, 3, g);
        REQUIRE(a.size() == 6);
        std::vector<std::uint8_t> labels(6);
        std::size_t high = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            REQUIRE(a.cell[i] <= 1);
            labels[i] = a.cell[i] == 0; // cell 0 is the high level
            high += labels[i];
        }
        REQUIRE(high == 3);
        ++counts.at(labels);
    }
    double chi2 = 0;
    const double expect = static_cast<double>(draws) / 20.0;
    for (const auto& kv : counts) {
        const double dlt = static_cast<double>(kv.second) - expect;
        chi2 += dlt * dlt / expect;
    }
    CHECK(chi2 < 43.82);
}

TEST_CASE("factorial draws balance cells and have uniform cell marginals") {
    const int k = 2;
    const std::size_t r = 2, draws = 40000;
    auto g = rng::stream(104, 0);
    const std::size_t n = r << k;
    std::vector<std::vector<double>> tally(n, std::vector<double>(std::size_t{1} << k, 0));
    for (std::size_t d = 0; d < draws; ++d) {
        const auto a = draw_factorial(k, r, g);
        std::vector<std::size_t> per_cell(a.cells(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++per_cell[a.cell[i]];
            tally[i][a.cell[i]] += 1;
        }
        for (auto c : per_cell) REQUIRE(c == r);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < tally[i].size(); ++j)
            CHECK(std::abs(tally[i][j] / draws - 0.25) < 4 * std::sqrt(0.1875 / draws));
}

TEST_CASE("pair enumerator decodes masks into flips") {
    pair_enumerator e(3);
    CHECK(e.count() == 8);
    std::size_t seen = 0;
    for (; !e.done(); e.advance()) {
        const auto a = e.assignment();
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(a.first_treated[i] == ((e.mask() >> i) & 1u));
        ++seen;
    }
    CHECK(seen == 8);
}

TEST_CASE("designs reject invalid shapes and oversized enumerations") {
    auto g = rng::stream(1, 0);
    CHECK_THROWS_AS((void)draw_crd(4, 0, g), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_crd(4, 4, g), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_crd(1, 1, g), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_factorial(0, 2, g), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_factorial(21, 2, g), std::invalid_argument);
    CHECK_THROWS_AS((void)draw_pairs(0, g), std::invalid_argument);

    CHECK_THROWS_AS(crd_enumerator(40, 20), enumeration_cap_error);
    try {
        crd_enumerator e(40, 20);
    } catch (const enumeration_cap_error& err) {
        CHECK(err.count() == 137846528820ull);
        CHECK(err.cap() == defaults::enumeration_cap);
    }
    CHECK_THROWS_AS(pair_enumerator(63), std::invalid_argument);
    CHECK_THROWS_AS(pair_enumerator(24), enumeration_cap_error); // 2^24 > cap
    CHECK_NOTHROW(pair_enumerator(23));
}
