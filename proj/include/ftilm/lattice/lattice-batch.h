// include/ftilm/lattice/lattice-batch.h

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

#ifndef FTILM_LATTICE_LATTICE_BATCH_H_
#define FTILM_LATTICE_LATTICE_BATCH_H_

#include <span>
#include <vector>

#include "ftilm/lattice/transducer-lattice.h"

namespace ftilm {

// One lattice per worker.  Results are written to per-item slots, so the
// output is identical to the serial version for any thread count.
std::vector<double> BatchFullSumLoss(std::span<const LogProbLattice> lattices);

// masks may be empty (dense) or one per lattice.
std::vector<double> BatchLossAndGradients(
    std::span<const LogProbLattice> lattices, std::span<const BandMask> masks,
    std::vector<LatticeGradients> *grads);

namespace serial {

// Reference implementations kept for tests and benchmarks.
std::vector<double> BatchFullSumLoss(std::span<const LogProbLattice> lattices);

std::vector<double> BatchLossAndGradients(
    std::span<const LogProbLattice> lattices, std::span<const BandMask> masks,
    std::vector<LatticeGradients> *grads);

}  // namespace serial
}  // namespace ftilm

#endif  // FTILM_LATTICE_LATTICE_BATCH_H_
