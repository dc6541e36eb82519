// include/ftilm/base/parallel.h

// Copyright 2026  The ftilm Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FTILM_BASE_PARALLEL_H_
#define FTILM_BASE_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftilm {

// Runs fn(i) for i in [0, n) on the OpenMP team.  Exceptions cannot cross
// the parallel region, so each one is parked in its slot and the one with
// the lowest index is rethrown afterwards; the error a caller sees does not
// depend on scheduling.
template <typename Fn>
void ParallelFor(size_t n, Fn &&fn) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

inline int NumThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ftilm

#endif  // FTILM_BASE_PARALLEL_H_
