#ifndef TORUSKAM_PARALLEL_HPP
#define TORUSKAM_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace toruskam::par {

// All kernels are maps over independent indices; no floating-point
// reductions run in parallel, so results are identical for any thread
// count. `serial` is the reference path the tests compare against.
enum class Mode { serial, openmp };

inline int& thread_count_ref() {
    static int count = 0;  // 0 = library default
    return count;
}

inline int max_threads() {
    int c = thread_count_ref();
    if (c > 0) return c;
    if (const char* env = std::getenv("TORUSKAM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) { thread_count_ref() = n; }

template <class F>
inline void for_each(std::size_t n, F&& f, Mode mode = Mode::openmp) {
#ifdef _OPENMP
    if (mode == Mode::openmp && max_threads() > 1) {
        const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            f(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)mode;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace toruskam::par

#endif
