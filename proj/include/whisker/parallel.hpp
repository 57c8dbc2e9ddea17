#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace whisker {

// Execution policy for the data-parallel kernels (GPIS field evaluation,
// batched queries, MLP batch gradients, campaign episodes). Serial is the
// reference path; tests compare both.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace whisker
