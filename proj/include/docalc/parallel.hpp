#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace docalc {

// Execution mode for batch loops. Both modes produce bit-identical results:
// parallel loops only ever split across independent output slots, and each
// slot is accumulated in a fixed serial order.
enum class Exec { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Runs body(i) for i in [0, n). Iterations must not share mutable state.
// Exceptions thrown by iterations are captured and the first one is rethrown
// after the loop joins (throwing across an OpenMP region would terminate).
template <class F>
void parallel_for(int n, Exec mode, F&& body) {
    std::exception_ptr first_error = nullptr;
    std::mutex guard;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (mode == Exec::parallel)
#else
    (void)mode;
#endif
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace docalc
