// Thin OpenMP facade: resolves a --jobs request to a worker count and
// compiles away cleanly when OpenMP is absent.
#ifndef CDT_PAR_HPP
#define CDT_PAR_HPP

#ifdef CDT_HAVE_OPENMP
#include <omp.h>
#endif

namespace cdt {

// 0 = library default (all hardware threads when OpenMP is available),
// 1 = serial reference path, k>1 = that many workers.
inline int effective_jobs(int jobs) {
#ifdef CDT_HAVE_OPENMP
  if (jobs <= 0) return omp_get_max_threads();
  return jobs;
#else
  (void)jobs;
  return 1;
#endif
}

}  // namespace cdt

#endif  // CDT_PAR_HPP
