#include "ciqa/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ciqa::par {

namespace {
std::atomic<int> g_workers{0};
}

void set_workers(int n) { g_workers.store(n < 0 ? 0 : n); }

int workers() { return g_workers.load(); }

int effective_workers() {
    int w = g_workers.load();
    if (w > 0) return w;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace ciqa::par
