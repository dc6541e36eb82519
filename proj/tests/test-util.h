// tests/test-util.h

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

#ifndef FTILM_TESTS_TEST_UTIL_H_
#define FTILM_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ftilm/base/rng.h"
#include "ftilm/factorization/factorized-scores.h"
#include "ftilm/lattice/transducer-lattice.h"

namespace ftilm::testing {

inline LogProbLattice RandomLattice(int T, int U, Rng *rng) {
  LogProbLattice lat(T, U);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      lat.Blank(t, u) = std::log(rng->Uniform(0.05, 0.95));
      if (u < U) lat.Label(t, u) = std::log(rng->Uniform(0.05, 0.95));
    }
  }
  return lat;
}

inline FTScores RandomScores(int T, int num_histories, int V, Rng *rng,
                             double scale = 1.0) {
  FTScores s(T, num_histories, V);
  for (int t = 0; t < T; ++t)
    for (double &x : s.AmLogits(t)) x = rng->Normal(0.0, scale);
  for (int u = 0; u < num_histories; ++u)
    for (double &x : s.IlmLogits(u)) x = rng->Normal(0.0, scale);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < num_histories; ++u)
      s.BlankLogit(t, u) = rng->Normal(0.0, scale);
  return s;
}

// Central difference of f around *x (restored afterwards).
inline double CentralDifference(double *x, const std::function<double()> &f,
                                double eps = 1e-5) {
  const double saved = *x;
  *x = saved + eps;
  const double plus = f();
  *x = saved - eps;
  const double minus = f();
  *x = saved;
  return (plus - minus) / (2.0 * eps);
}

// |a - n| / max(|a|, |n|), with an absolute floor so that two gradients that
// are both numerically zero compare equal.
inline double RelativeError(double analytic, double numeric,
                            double floor = 1e-6) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace ftilm::testing

#endif  // FTILM_TESTS_TEST_UTIL_H_
