// src/lattice/lattice-batch.cc

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

#include "ftilm/lattice/lattice-batch.h"

#include <exception>

#include "ftilm/base/errors.h"
#include "ftilm/base/parallel.h"

namespace ftilm {

namespace {

void CheckMasks(std::span<const LogProbLattice> lattices,
                std::span<const BandMask> masks) {
  if (!masks.empty() && masks.size() != lattices.size())
    throw InvalidInput("BatchLossAndGradients: need zero or one mask per lattice");
}

}  // namespace

std::vector<double> BatchFullSumLoss(std::span<const LogProbLattice> lattices) {
  std::vector<double> losses(lattices.size());
  ParallelFor(lattices.size(), [&](size_t i) {
    losses[i] = FullSumLoss(lattices[i]);
  });
  return losses;
}

std::vector<double> BatchLossAndGradients(
    std::span<const LogProbLattice> lattices, std::span<const BandMask> masks,
    std::vector<LatticeGradients> *grads) {
  CheckMasks(lattices, masks);
  std::vector<double> losses(lattices.size());
  grads->assign(lattices.size(), LatticeGradients());
  ParallelFor(lattices.size(), [&](size_t i) {
    const BandMask *mask = masks.empty() ? nullptr : &masks[i];
    losses[i] = LossAndGradients(lattices[i], mask, &(*grads)[i]);
  });
  return losses;
}

namespace serial {

std::vector<double> BatchFullSumLoss(std::span<const LogProbLattice> lattices) {
  std::vector<double> losses;
  losses.reserve(lattices.size());
  for (const auto &lattice : lattices) losses.push_back(FullSumLoss(lattice));
  return losses;
}

std::vector<double> BatchLossAndGradients(
    std::span<const LogProbLattice> lattices, std::span<const BandMask> masks,
    std::vector<LatticeGradients> *grads) {
  CheckMasks(lattices, masks);
  std::vector<double> losses(lattices.size());
  grads->assign(lattices.size(), LatticeGradients());
  for (size_t i = 0; i < lattices.size(); ++i) {
    const BandMask *mask = masks.empty() ? nullptr : &masks[i];
    losses[i] = LossAndGradients(lattices[i], mask, &(*grads)[i]);
  }
  return losses;
}

}  // namespace serial
}  // namespace ftilm
