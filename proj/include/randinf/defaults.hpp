#pragma once

#include <cstdint>

namespace randinf::defaults {

/// Complete enumeration refused above this many assignments.
inline constexpr std::uint64_t enumeration_cap = 10'000'000;

/// Monte Carlo randomization-test draws.
inline constexpr std::uint64_t mc_draws = 100'000;

/// Two-sided test level.
inline constexpr double alpha = 0.05;

} // namespace randinf::defaults
