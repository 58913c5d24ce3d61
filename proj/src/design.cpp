#include "randinf/design.hpp"

#include <numeric>
#include <stdexcept>

namespace randinf {

std::uint64_t binomial_coefficient(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // c * (n - k + i) is exact in 128 bits; division by i is exact because
        // the running value is itself a binomial coefficient
        __uint128_t next = static_cast<__uint128_t>(c) * (n - k + i) / i;
        if (next > static_cast<__uint128_t>(UINT64_MAX)) return UINT64_MAX;
        c = static_cast<std::uint64_t>(next);
    }
    return c;
}

Assignment draw_crd(std::size_t n, std::size_t n1, rng& g) {
    if (n < 2 || n1 == 0 || n1 >= n)
        throw std::invalid_argument("draw_crd: need 0 < n1 < n and n >= 2");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Assignment a;
    a.labels.assign(n, 0);
    a.n1 = n1;
    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(g.below(n - i));
        std::swap(idx[i], idx[j]);
        a.labels[idx[i]] = 1;
    }
    return a;
}

PairAssignment draw_pairs(std::size_t n_pairs, rng& g) {
    if (n_pairs == 0)
        throw std::invalid_argument("draw_pairs: need at least one pair");
    PairAssignment a;
    a.first_treated.resize(n_pairs);
    for (auto& f : a.first_treated) f = static_cast<std::uint8_t>(g.next() & 1u);
    return a;
}

FactorialAssignment draw_factorial(int k, std::size_t r, rng& g) {
    if (k < 1 || k > 20 || r == 0)
        throw std::invalid_argument("draw_factorial: need 1 <= k <= 20 and r >= 1");
    const std::size_t cells = std::size_t{1} << k;
    const std::size_t n = cells * r;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(g.below(i + 1));
        std::swap(order[i], order[j]);
    }
    FactorialAssignment a;
    a.k = k;
    a.r = r;
    a.cell.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        a.cell[order[pos]] = static_cast<std::uint32_t>(pos / r);
    return a;
}

crd_enumerator::crd_enumerator(std::size_t n, std::size_t n1, std::uint64_t cap)
    : n_(n), n1_(n1), count_(binomial_coefficient(n, n1)) {
    if (n1 > n) throw std::invalid_argument("crd_enumerator: n1 > n");
    if (count_ > cap) throw enumeration_cap_error(count_, cap);
    comb_.resize(n1_);
    std::iota(comb_.begin(), comb_.end(), std::size_t{0});
}

Assignment crd_enumerator::assignment() const {
    Assignment a;
    a.labels.assign(n_, 0);
    a.n1 = n1_;
    for (std::size_t v : comb_) a.labels[v] = 1;
    return a;
}

bool crd_enumerator::advance() {
    std::size_t i = n1_;
    while (i-- > 0) {
        if (comb_[i] < n_ - n1_ + i) {
            ++comb_[i];
            for (std::size_t j = i + 1; j < n1_; ++j) comb_[j] = comb_[j - 1] + 1;
            ++rank_;
            return true;
        }
    }
    done_ = true;
    return false;
}

void crd_enumerator::seek(std::uint64_t rank) {
    if (rank >= count_) {
        done_ = true;
        rank_ = count_;
        return;
    }
    done_ = false;
    rank_ = rank;
    std::uint64_t rem = rank;
    std::size_t v = 0;
    for (std::size_t i = 0; i < n1_; ++i) {
        for (;; ++v) {
            const std::uint64_t block = binomial_coefficient(n_ - 1 - v, n1_ - 1 - i);
            if (rem < block) break;
            rem -= block;
        }
        comb_[i] = v++;
    }
}

pair_enumerator::pair_enumerator(std::size_t n_pairs, std::uint64_t cap) : n_(n_pairs) {
    if (n_pairs == 0 || n_pairs > 62)
        throw std::invalid_argument("pair_enumerator: need 1 <= n_pairs <= 62");
    count_ = std::uint64_t{1} << n_;
    if (count_ > cap) throw enumeration_cap_error(count_, cap);
}

PairAssignment pair_enumerator::assignment() const {
    PairAssignment a;
    a.first_treated.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
        a.first_treated[i] = static_cast<std::uint8_t>((mask_ >> i) & 1u);
    return a;
}

} // namespace randinf
