// include/ftilm/harness/checks.h


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

#ifndef FTILM_HARNESS_CHECKS_H_
#define FTILM_HARNESS_CHECKS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ftilm {

// Outcome of one self-check: `value` is the worst observed error (or count)
// and passes iff it is within `tolerance`.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

nlohmann::json ToJson(const std::vector<CheckResult> &checks);
bool AllPassed(const std::vector<CheckResult> &checks);

// |a - n| / max(|a|, |n|, floor)
double RelativeGradientError(double analytic, double numeric, double floor);

// Central differences (eps = 1e-5) against the analytic gradients of the
// lattice loss, the ILM, the end-to-end FT model (dense and banded) and the
// MWER loss.
std::vector<CheckResult> GradientChecks(uint64_t seed);

// Full-sum loss against path enumeration on random lattices (T <= 5, U <= 4).
CheckResult LatticeOracleCheck(uint64_t seed, int num_lattices = 200);
// P_b + sum_k P_k = 1 on random cells.
CheckResult NormalizationCheck(uint64_t seed, int num_cells = 1000);
// Fused scores with alpha = 1, beta = 0 are bit-identical to training scores.
CheckResult ReductionIdentityCheck(uint64_t seed, int num_cells = 1000);
// Full band, nested narrowing, zero context and masked enumeration.
std::vector<CheckResult> BandChecks(uint64_t seed);
// Saturated beam against exhaustive search on every small shape.
CheckResult BeamOracleCheck(uint64_t seed);
// Bounds and shift invariance of the MWER loss on random N-best lists.
CheckResult MwerPropertyCheck(uint64_t seed, int num_lists = 1000);

// Everything except the gradients.
std::vector<CheckResult> OracleChecks(uint64_t seed);

}  // namespace ftilm

#endif  // FTILM_HARNESS_CHECKS_H_
