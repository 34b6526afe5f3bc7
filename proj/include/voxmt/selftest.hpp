#pragma once

#include <ostream>

namespace voxmt {

// Quick built-in oracle checks (kernel equivalence, sparse-vs-dense conv,
// fusion conservation, TTA inverses, metric identities). Prints one line per
// check; returns true when everything passed.
bool run_selftest(std::ostream& os);

}  // namespace voxmt
