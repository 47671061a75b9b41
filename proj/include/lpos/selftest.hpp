#pragma once

namespace lpos {

// Smoke suites behind `lpos selftest`: oracle equivalence (exhaustive small
// cases plus seeded random scenarios), the comparison-session bound, and the
// sentinel taint suite with its negative control. Prints one line per suite;
// returns false if any suite fails.
bool run_selftests(bool nist_profile);

}  // namespace lpos
