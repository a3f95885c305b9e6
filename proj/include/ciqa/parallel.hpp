#pragma once

namespace ciqa::par {

// Worker-count knob shared by all OpenMP kernels. 0 picks the OpenMP
// default. Thread count changes wall-clock only, never results: every
// parallel kernel writes to disjoint slots and reduces in a fixed order.
void set_workers(int n);
int workers();

// Value actually passed to num_threads() clauses: workers(), or the
// OpenMP default when unset.
int effective_workers();

}  // namespace ciqa::par
