#pragma once

#include <iosfwd>

namespace lff {

// Built-in invariant and oracle suite behind the `verify` CLI command:
// vector-op properties, finite-difference gradient checks on every oracle
// kind, the closed-form coefficient checks, the Q=1 degeneracy, the
// constant-gradient collapse, budget/box containment and a double-run
// determinism check. Prints one PASS/FAIL line per check; returns true iff
// everything passed.
bool run_verification_suite(std::ostream& os);

}  // namespace lff
