#include "randinf/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "randinf/errors.hpp"

namespace randinf {

namespace {

struct ArmMoments {
    double mean1, mean0, s1sq, s0sq, ssq;
};

ArmMoments arm_moments(const ObservedData& d) {
    double sum1 = 0, sum0 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) (d.t[i] ? sum1 : sum0) += d.y[i];
    ArmMoments m{};
    m.mean1 = sum1 / static_cast<double>(d.n1);
    m.mean0 = sum0 / static_cast<double>(d.n0);
    const double grand = (sum1 + sum0) / static_cast<double>(d.size());
    double q1 = 0, q0 = 0, qg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double da = d.y[i] - (d.t[i] ? m.mean1 : m.mean0);
        const double dg = d.y[i] - grand;
        (d.t[i] ? q1 : q0) += da * da;
        qg += dg * dg;
    }
    m.s1sq = d.n1 > 1 ? q1 / static_cast<double>(d.n1 - 1) : 0.0;
    m.s0sq = d.n0 > 1 ? q0 / static_cast<double>(d.n0 - 1) : 0.0;
    m.ssq = qg / static_cast<double>(d.size() - 1);
    return m;
}

void require_arms(const ObservedData& d, std::size_t min_per_arm, const char* who) {
    if (d.n1 < min_per_arm)
        throw data_error(std::string(who) + ": treated arm has " + std::to_string(d.n1) +
                         " units, need " + std::to_string(min_per_arm));
    if (d.n0 < min_per_arm)
        throw data_error(std::string(who) + ": control arm has " + std::to_string(d.n0) +
                         " units, need " + std::to_string(min_per_arm));
}

} // namespace

double diff_in_means(const ObservedData& d) {
    require_arms(d, 1, "diff_in_means");
    double sum1 = 0, sum0 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) (d.t[i] ? sum1 : sum0) += d.y[i];
    return sum1 / static_cast<double>(d.n1) - sum0 / static_cast<double>(d.n0);
}

VarianceReport variance_report(const ObservedData& d) {
    require_arms(d, 2, "variance_report");
    const auto m = arm_moments(d);
    const double n1 = static_cast<double>(d.n1);
    const double n0 = static_cast<double>(d.n0);
    const double n = n1 + n0;

    VarianceReport r;
    r.n1 = d.n1;
    r.n0 = d.n0;
    r.tau_hat = m.mean1 - m.mean0;
    r.s1sq = m.s1sq;
    r.s0sq = m.s0sq;
    r.ssq = m.ssq;
    r.v_neyman = m.s1sq / n1 + m.s0sq / n0;
    r.v_fisher = n * m.ssq / (n1 * n0);
    r.v_score = (n - 1.0) * m.ssq / (n1 * n0);
    r.v_ols = n * ((n1 - 1.0) * m.s1sq + (n0 - 1.0) * m.s0sq) / ((n - 2.0) * n1 * n0);
    r.v_hw = m.s1sq * (n1 - 1.0) / (n1 * n1) + m.s0sq * (n0 - 1.0) / (n0 * n0);
    r.v_improved = (n0 / (n1 * n)) * m.s1sq + (n1 / (n0 * n)) * m.s0sq +
                   2.0 * std::sqrt(m.s1sq) * std::sqrt(m.s0sq) / n;
    return r;
}

double predicted_variance_gap(const PopulationSummary& s, std::size_t n1, std::size_t n0) {
    if (n1 == 0 || n0 == 0 || n1 + n0 != s.n)
        throw std::invalid_argument("predicted_variance_gap: arm sizes must sum to n");
    const double fn1 = static_cast<double>(n1), fn0 = static_cast<double>(n0);
    return (1.0 / fn0 - 1.0 / fn1) * (s.s1sq - s.s0sq) +
           s.tau * s.tau / static_cast<double>(s.n);
}

BinaryVarianceReport binary_report(const ObservedData& d) {
    require_arms(d, 1, "binary_report");
    double sum1 = 0, sum0 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.y[i] != 0.0 && d.y[i] != 1.0)
            throw data_error("binary_report: outcome at unit " + std::to_string(i) +
                             " is not 0/1");
        (d.t[i] ? sum1 : sum0) += d.y[i];
    }
    const double n1 = static_cast<double>(d.n1), n0 = static_cast<double>(d.n0);
    BinaryVarianceReport r;
    r.n1 = d.n1;
    r.n0 = d.n0;
    r.p1_hat = sum1 / n1;
    r.p0_hat = sum0 / n0;
    r.pooled_p = (sum1 + sum0) / (n1 + n0);
    r.arm1_constant = (r.p1_hat == 0.0 || r.p1_hat == 1.0);
    r.arm0_constant = (r.p0_hat == 0.0 || r.p0_hat == 1.0);
    r.v_unpooled = r.p1_hat * (1.0 - r.p1_hat) / n1 + r.p0_hat * (1.0 - r.p0_hat) / n0;
    r.v_pooled = r.pooled_p * (1.0 - r.pooled_p) * (1.0 / n1 + 1.0 / n0);
    return r;
}

double binary_variance_gap(double p1, double p0, std::size_t n1, std::size_t n0) {
    if (n1 == 0 || n0 == 0)
        throw std::invalid_argument("binary_variance_gap: arm sizes must be positive");
    if (p1 < 0 || p1 > 1 || p0 < 0 || p0 > 1)
        throw std::invalid_argument("binary_variance_gap: proportions must lie in [0,1]");
    const double fn1 = static_cast<double>(n1), fn0 = static_cast<double>(n0);
    const double diff = p1 - p0;
    return (1.0 / fn0 - 1.0 / fn1) * (p1 * (1.0 - p1) - p0 * (1.0 - p0)) +
           diff * diff / (fn1 + fn0);
}

PairEffectReport pair_report(const PairObservedData& d) {
    const std::size_t n = d.n_pairs();
    if (n < 2) throw data_error("pair_report: need at least 2 pairs");
    PairEffectReport r;
    r.per_pair.resize(n);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = d.first_treated[i] ? d.first[i] - d.second[i]
                                               : d.second[i] - d.first[i];
        r.per_pair[i] = diff;
        sum += diff;
    }
    const double fn = static_cast<double>(n);
    r.tau_hat = sum / fn;
    double q = 0, q2 = 0;
    for (double v : r.per_pair) {
        const double c = v - r.tau_hat;
        q += c * c;
        q2 += v * v;
    }
    r.v_neyman = q / (fn * (fn - 1.0));
    r.v_fisher = q2 / (fn * fn);
    return r;
}

PairEffectReport pair_report(const MatchedPairTable& mt, const PairAssignment& a) {
    return pair_report(observe_pairs(mt, a));
}

FactorialEffectReport factorial_report(const FactorialObservedData& d,
                                       const std::vector<int>& contrast) {
    const std::size_t cells = d.cells();
    if (contrast.size() != cells)
        throw std::invalid_argument("factorial_report: contrast length != cell count");
    if (d.r < 2) throw data_error("factorial_report: need r >= 2 for cell variances");

    FactorialEffectReport r;
    r.k = d.k;
    r.r = d.r;
    r.cell_means.assign(cells, 0.0);
    r.cell_vars.assign(cells, 0.0);

    for (std::size_t i = 0; i < d.size(); ++i) r.cell_means[d.cell[i]] += d.y[i];
    const double fr = static_cast<double>(d.r);
    for (auto& m : r.cell_means) m /= fr;

    double grand = 0;
    for (double v : d.y) grand += v;
    grand /= static_cast<double>(d.size());

    double qg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double dc = d.y[i] - r.cell_means[d.cell[i]];
        const double dg = d.y[i] - grand;
        r.cell_vars[d.cell[i]] += dc * dc;
        qg += dg * dg;
    }
    for (auto& v : r.cell_vars) v /= (fr - 1.0);
    const double ssq = qg / static_cast<double>(d.size() - 1);

    const double half_scale = std::pow(2.0, d.k - 1);   // 2^(k-1)
    const double denom = half_scale * half_scale * fr;  // 2^(2(k-1)) r

    double dot = 0, sum_vars = 0;
    for (std::size_t j = 0; j < cells; ++j) {
        dot += contrast[j] * r.cell_means[j];
        sum_vars += r.cell_vars[j];
    }
    r.effect = dot / half_scale;
    r.v_neyman = sum_vars / denom;
    r.v_fisher = static_cast<double>(cells) * ssq / denom;
    return r;
}

FactorialEffectReport factorial_report(const FactorialTable& ft,
                                       const FactorialAssignment& a,
                                       const std::vector<int>& contrast) {
    return factorial_report(observe_factorial(ft, a), contrast);
}

double predicted_factorial_variance_gap(const std::vector<double>& cell_means,
                                        int k, std::size_t r) {
    const std::size_t cells = std::size_t{1} << k;
    if (cell_means.size() != cells)
        throw std::invalid_argument("predicted_factorial_variance_gap: wrong mean count");
    if (r == 0) throw std::invalid_argument("predicted_factorial_variance_gap: r >= 1");
    double acc = 0;
    for (std::size_t a = 0; a < cells; ++a)
        for (std::size_t b = 0; b < cells; ++b) {
            const double diff = cell_means[a] - cell_means[b];
            acc += diff * diff;
        }
    const double denom = std::pow(2.0, 3 * k - 1) * static_cast<double>(r);
    return acc / denom;
}

} // namespace randinf
