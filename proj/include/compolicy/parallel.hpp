#pragma once

#include <cstdlib>
#include <exception>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace compolicy {

// Job count resolution: explicit argument wins, then the COMPOLICY_JOBS
// environment variable, then the OpenMP default (1 in a serial build).
inline int default_jobs() {
  if (const char* env = std::getenv("COMPOLICY_JOBS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int resolve_jobs(int jobs) { return jobs >= 1 ? jobs : default_jobs(); }

// Run fn(i) for i in [0, n).  jobs == 1 takes the plain serial loop, kept as
// the reference path; more jobs use an OpenMP worksharing loop.  Callers
// write results into per-index slots and fold them in index order, so both
// paths produce identical output.  The first exception thrown by any task is
// rethrown after the loop.
inline void for_each_index(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = resolve_jobs(jobs);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(compolicy_parallel_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace compolicy
