#pragma once

#include <string>

#include "randinf/harness.hpp"

namespace randinf {

/* Bundled demonstration scenarios.
 *
 * 1: balanced two-arm experiment (n = 100, 50/50, equal arm variances 1/16,
 *    average effect 0.1) where the normal-approximation test and the
 *    randomization test each reject roughly half the time yet disagree on a
 *    visible slice of replicates, almost always in the same direction.
 * 2: unbalanced experiment (70/30, arm variances 1/4 vs 1/16) where the
 *    normal-approximation test keeps firing while the randomization test goes
 *    almost silent.
 *
 * Master seeds are pinned so the one frozen population draw lands inside the
 * bands that check_example_signature() verifies. */
ScenarioConfig example_config(int which);

struct SignatureCheck {
    bool ok = false;
    std::string detail; // one line per checked clause
};

/// Verify a finished run of example_config(which) against its pinned bands.
SignatureCheck check_example_signature(int which, const ScenarioResult& res);

} // namespace randinf
