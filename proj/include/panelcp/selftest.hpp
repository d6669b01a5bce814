#pragma once

#include <ostream>

namespace panelcp {

// Fast invariant suite: weighted-quantile oracle equivalence, the
// uniform-weight reduction, the soft-neighborhood Lipschitz bound, the
// telescoping/range/observed-bound identities on random engine runs, and the
// p = 0 method equivalences. Prints one line per check; returns true when
// everything passes.
bool selftest(std::ostream& out, bool verbose = false);

}  // namespace panelcp
