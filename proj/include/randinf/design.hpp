#pragma once

#include <cstdint>
#include <vector>

#include "randinf/defaults.hpp"
#include "randinf/errors.hpp"
#include "randinf/rng.hpp"

namespace randinf {

/// Two-arm completely randomized assignment: labels[i] in {0,1}, exactly n1 ones.
struct Assignment {
    std::vector<std::uint8_t> labels;
    std::size_t n1 = 0;

    std::size_t size() const noexcept { return labels.size(); }
};

/// Matched-pair assignment: first_treated[i]=1 puts pair i's first unit in the
/// treated arm and its second unit in control; 0 swaps the roles.
struct PairAssignment {
    std::vector<std::uint8_t> first_treated;

    std::size_t n_pairs() const noexcept { return first_treated.size(); }
};

/// Balanced 2^k factorial assignment: cell[i] is unit i's cell in canonical
/// order; every cell receives exactly r units.
struct FactorialAssignment {
    std::vector<std::uint32_t> cell;
    int k = 1;
    std::size_t r = 1;

    std::size_t size() const noexcept { return cell.size(); }
    std::size_t cells() const noexcept { return std::size_t{1} << k; }
};

/// C(n, k) computed exactly; saturates at UINT64_MAX on overflow.
std::uint64_t binomial_coefficient(std::uint64_t n, std::uint64_t k);

/// Uniform draw over the C(n, n1) treated-index sets (partial Fisher-Yates).
Assignment draw_crd(std::size_t n, std::size_t n1, rng& g);

/// Independent fair coin per pair.
PairAssignment draw_pairs(std::size_t n_pairs, rng& g);

/// Uniform draw over balanced allocations of r*2^k units into 2^k cells.
FactorialAssignment draw_factorial(int k, std::size_t r, rng& g);

/* Complete enumeration of treated-index sets in lexicographic order.
 *
 *     for (crd_enumerator e(n, n1); !e.done(); e.advance()) use(e.treated());
 *
 * seek(rank) repositions in O(n) by combinatorial unranking, so workers can
 * each instantiate an enumerator over their own rank range. Construction
 * refuses counts above the cap. */
class crd_enumerator {
public:
    crd_enumerator(std::size_t n, std::size_t n1,
                   std::uint64_t cap = defaults::enumeration_cap);

    std::uint64_t count() const noexcept { return count_; }
    bool done() const noexcept { return done_; }
    std::uint64_t rank() const noexcept { return rank_; }

    /// Treated indices, ascending. Valid while !done().
    const std::vector<std::size_t>& treated() const noexcept { return comb_; }

    Assignment assignment() const;

    bool advance();
    void seek(std::uint64_t rank);

private:
    std::size_t n_, n1_;
    std::uint64_t count_, rank_ = 0;
    bool done_ = false;
    std::vector<std::size_t> comb_;
};

/* Complete enumeration of the 2^n_pairs within-pair flips; mask bit i set
 * means pair i's first unit is treated. */
class pair_enumerator {
public:
    explicit pair_enumerator(std::size_t n_pairs,
                             std::uint64_t cap = defaults::enumeration_cap);

    std::uint64_t count() const noexcept { return count_; }
    bool done() const noexcept { return mask_ >= count_; }
    std::uint64_t mask() const noexcept { return mask_; }

    PairAssignment assignment() const;

    bool advance() { return ++mask_ < count_; }

private:
    std::size_t n_;
    std::uint64_t count_, mask_ = 0;
};

} // namespace randinf
