#pragma once

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ltdfm {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};  // 0 = auto
  return n;
}
}  // namespace detail

inline void set_num_threads(int n) { detail::thread_setting().store(n < 0 ? 0 : n); }

inline int num_threads() {
  int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("LTDFM_THREADS")) {
    int e = std::atoi(env);
    if (e > 0) return e;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Data-parallel loop over independent work items. Iterations must not share
// mutable state; each item owns its rng substream, so serial (1 thread) and
// parallel executions produce bit-identical results.
template <class F>
void parallel_for(int n, F&& f) {
  int k = num_threads();
#ifdef _OPENMP
  if (k > 1 && n > 1) {
#pragma omp parallel for num_threads(k) schedule(static)
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
#endif
  (void)k;
  for (int i = 0; i < n; ++i) f(i);
}

}  // namespace ltdfm
