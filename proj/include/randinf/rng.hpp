#pragma once

#include <cmath>
#include <cstdint>

namespace randinf {

namespace detail {

/* SplitMix64 output function (Steele/Lea/Flood). Bijective mix, used for
 * seeding and stream derivation. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/* xoshiro256++ (Blackman & Vigna, public domain), with stream splitting:
 * rng::stream(master_seed, k) yields generators whose 256-bit states are
 * derived through distinct SplitMix64 chains, so replicate k's stream is
 * reproducible in isolation and independent of how work is scheduled. */
class rng {
public:
    explicit rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = detail::splitmix64(sm);
        spare_valid_ = false;
    }

    /// Independent stream for a (master seed, stream index) pair.
    static rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
        // decorrelate the stream index with a second odd constant so
        // consecutive streams do not walk the same SplitMix64 chain
        std::uint64_t h = master_seed ^ (0xd1342543de82ef95ull * (stream_index + 1));
        std::uint64_t sm = h;
        (void)detail::splitmix64(sm); // burn one step: avoids (seed,0) == raw seed
        return rng(detail::splitmix64(sm));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n), n >= 1. Lemire's unbiased multiply-reject.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Marsaglia polar; deterministic given the stream.
    double normal() {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        spare_valid_ = true;
        return u * f;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool spare_valid_;
};

} // namespace randinf
