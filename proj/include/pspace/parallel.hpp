#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pspace {

/// Sets the worker-pool size for all parallel loops in the library.
/// n <= 0 keeps the runtime default (hardware concurrency).
inline void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int num_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Parallel loop over [0, n). Each index writes only its own outputs, so
/// results are byte-identical for any thread count.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        body(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

/// Same as parallel_for but with a user-chosen chunk size, for loops whose
/// per-index cost is small.
template <typename F>
void parallel_for_chunked(std::size_t n, std::size_t chunk, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (long long c = 0; c < static_cast<long long>((n + chunk - 1) / chunk); ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * chunk;
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        for (std::size_t i = begin; i < end; ++i) body(i);
    }
#else
    (void)chunk;
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

} // namespace pspace
