#include "randinf/population.hpp"

#include <cmath>
#include <stdexcept>

#include "randinf/errors.hpp"

namespace randinf {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": non-finite value");
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// n-1 divisor
double variance_about(const std::vector<double>& v, double center) {
    double s = 0;
    for (double x : v) {
        const double d = x - center;
        s += d * d;
    }
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

PotentialTable::PotentialTable(std::vector<double> treated, std::vector<double> control)
    : y1_(std::move(treated)), y0_(std::move(control)) {
    if (y1_.size() != y0_.size())
        throw std::invalid_argument("PotentialTable: arm lengths differ");
    if (y1_.size() < 2)
        throw std::invalid_argument("PotentialTable: need at least 2 units");
    require_finite(y1_, "PotentialTable treated");
    require_finite(y0_, "PotentialTable control");
}

double PopulationSummary::sampling_variance(std::size_t n1, std::size_t n0) const {
    if (n1 == 0 || n0 == 0 || n1 + n0 != n)
        throw std::invalid_argument("sampling_variance: arm sizes must be positive and sum to n");
    return s1sq / static_cast<double>(n1) + s0sq / static_cast<double>(n0) -
           stausq / static_cast<double>(n);
}

PopulationSummary summarize_population(const PotentialTable& pt) {
    const auto& y1 = pt.treated();
    const auto& y0 = pt.control();
    const std::size_t n = pt.size();

    PopulationSummary s;
    s.n = n;
    s.mean1 = mean_of(y1);
    s.mean0 = mean_of(y0);
    s.tau = s.mean1 - s.mean0;
    double q1 = 0, q0 = 0, qt = 0, c = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = y1[i] - s.mean1;
        const double d0 = y0[i] - s.mean0;
        const double dt = d1 - d0;
        q1 += d1 * d1;
        q0 += d0 * d0;
        qt += dt * dt;
        c += d1 * d0;
    }
    const double denom = static_cast<double>(n - 1);
    s.s1sq = q1 / denom;
    s.s0sq = q0 / denom;
    s.stausq = qt / denom;
    s.s10 = c / denom;
    return s;
}

PotentialTable freeze_normal_population(std::size_t n, double mu1, double var1,
                                        double mu0, double var0, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("freeze_normal_population: n >= 2");
    if (var1 < 0 || var0 < 0)
        throw std::invalid_argument("freeze_normal_population: negative variance");
    rng g = rng::stream(seed, 0);
    const double sd1 = std::sqrt(var1), sd0 = std::sqrt(var0);
    std::vector<double> y1(n), y0(n);
    for (auto& v : y1) v = mu1 + sd1 * g.normal();
    for (auto& v : y0) v = mu0 + sd0 * g.normal();
    return PotentialTable(std::move(y1), std::move(y0));
}

PotentialTable rescale_to_moments(const PotentialTable& pt, double mu1, double var1,
                                  double mu0, double var0) {
    if (var1 < 0 || var0 < 0)
        throw std::invalid_argument("rescale_to_moments: negative variance");
    auto scale_arm = [](const std::vector<double>& v, double mu, double var,
                        const char* arm) {
        const double m = mean_of(v);
        const double s2 = variance_about(v, m);
        if (s2 == 0)
            throw data_error(std::string("rescale_to_moments: constant ") + arm + " arm");
        const double f = std::sqrt(var / s2);
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = mu + (v[i] - m) * f;
        return out;
    };
    return PotentialTable(scale_arm(pt.treated(), mu1, var1, "treated"),
                          scale_arm(pt.control(), mu0, var0, "control"));
}

MatchedPairTable::MatchedPairTable(std::vector<PairPotentials> pairs)
    : pairs_(std::move(pairs)) {
    if (pairs_.size() < 2)
        throw std::invalid_argument("MatchedPairTable: need at least 2 pairs");
    for (const auto& p : pairs_)
        if (!std::isfinite(p.first_y1) || !std::isfinite(p.first_y0) ||
            !std::isfinite(p.second_y1) || !std::isfinite(p.second_y0))
            throw std::invalid_argument("MatchedPairTable: non-finite value");
}

FactorialTable::FactorialTable(int k, std::size_t r, std::vector<double> values)
    : k_(k), r_(r), values_(std::move(values)) {
    if (k < 1 || k > 20) throw std::invalid_argument("FactorialTable: need 1 <= k <= 20");
    if (r == 0) throw std::invalid_argument("FactorialTable: need r >= 1");
    const std::size_t want = size() * cells();
    if (values_.size() != want)
        throw std::invalid_argument("FactorialTable: expected " + std::to_string(want) +
                                    " values, got " + std::to_string(values_.size()));
    require_finite(values_, "FactorialTable");
}

std::vector<int> FactorialTable::main_effect_contrast(int factor) const {
    if (factor < 1 || factor > k_)
        throw std::invalid_argument("main_effect_contrast: factor out of range");
    std::vector<int> g(cells());
    for (std::size_t j = 0; j < g.size(); ++j)
        g[j] = ((j >> (k_ - factor)) & 1u) ? -1 : +1;
    return g;
}

std::vector<double> FactorialTable::cell_population_means() const {
    std::vector<double> m(cells(), 0.0);
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < cells(); ++j) m[j] += y(i, j);
    for (auto& v : m) v /= static_cast<double>(size());
    return m;
}

ObservedData make_observed(std::vector<double> y, std::vector<std::uint8_t> t) {
    if (y.size() != t.size())
        throw std::invalid_argument("make_observed: outcome/label lengths differ");
    if (y.size() < 2) throw std::invalid_argument("make_observed: need at least 2 units");
    require_finite(y, "make_observed");
    ObservedData d;
    d.y = std::move(y);
    d.t = std::move(t);
    for (auto v : d.t) {
        if (v > 1) throw std::invalid_argument("make_observed: labels must be 0 or 1");
        d.n1 += v;
    }
    d.n0 = d.t.size() - d.n1;
    return d;
}

ObservedData observe(const PotentialTable& pt, const Assignment& a) {
    const std::size_t n = pt.size();
    if (a.size() != n) throw std::invalid_argument("observe: assignment length mismatch");
    ObservedData d;
    d.y.resize(n);
    d.t = a.labels;
    d.n1 = a.n1;
    d.n0 = n - a.n1;
    for (std::size_t i = 0; i < n; ++i)
        d.y[i] = a.labels[i] ? pt.treated()[i] : pt.control()[i];
    return d;
}

PairObservedData observe_pairs(const MatchedPairTable& mt, const PairAssignment& a) {
    const std::size_t n = mt.n_pairs();
    if (a.n_pairs() != n)
        throw std::invalid_argument("observe_pairs: assignment length mismatch");
    PairObservedData d;
    d.first.resize(n);
    d.second.resize(n);
    d.first_treated = a.first_treated;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mt.pairs()[i];
        if (a.first_treated[i]) {
            d.first[i] = p.first_y1;
            d.second[i] = p.second_y0;
        } else {
            d.first[i] = p.first_y0;
            d.second[i] = p.second_y1;
        }
    }
    return d;
}

FactorialObservedData observe_factorial(const FactorialTable& ft,
                                        const FactorialAssignment& a) {
    if (a.size() != ft.size() || a.k != ft.k() || a.r != ft.r())
        throw std::invalid_argument("observe_factorial: assignment/table mismatch");
    FactorialObservedData d;
    d.k = ft.k();
    d.r = ft.r();
    d.cell = a.cell;
    d.y.resize(ft.size());
    for (std::size_t i = 0; i < ft.size(); ++i) d.y[i] = ft.y(i, a.cell[i]);
    return d;
}

double hajek_diagnostic(const std::vector<double>& x, std::size_t n_sample) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("hajek_diagnostic: need at least 2 values");
    if (n_sample == 0 || n_sample >= n)
        throw std::invalid_argument("hajek_diagnostic: need 1 <= n_sample < N");
    const double m = mean_of(x);
    double ss = 0, worst = 0;
    for (double v : x) {
        const double d = (v - m) * (v - m);
        ss += d;
        if (d > worst) worst = d;
    }
    if (ss == 0) throw data_error("hajek_diagnostic: constant input, ratio undefined");
    return worst / (ss / static_cast<double>(n));
}

} // namespace randinf
