// tests/lattice-test.cc

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

#include "doctest.h"

#include <cmath>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"
#include "ftilm/lattice/lattice-batch.h"
#include "ftilm/lattice/transducer-lattice.h"
#include "test-util.h"

namespace ftilm {
namespace {

using testing::CentralDifference;
using testing::RandomLattice;
using testing::RelativeError;

TEST_CASE("single blank path") {
  LogProbLattice lat(1, 0);
  lat.Blank(0, 0) = -1.0;
  CHECK(FullSumLoss(lat) == doctest::Approx(1.0).epsilon(1e-15));
  int64_t paths = 0;
  CHECK(BruteForceLoss(lat, &paths) == doctest::Approx(1.0));
  CHECK(paths == 1);
  LatticeGradients g = LossGradients(lat);
  CHECK(g.Blank(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_FALSE(g.no_path_mass);
}

TEST_CASE("two-path lattice matches enumeration") {
  LogProbLattice lat(2, 1);
  for (int t = 0; t < 2; ++t) {
    for (int u = 0; u <= 1; ++u) lat.Blank(t, u) = std::log(0.5);
    lat.Label(t, 0) = std::log(0.25);
  }
  int64_t paths = 0;
  const double oracle = BruteForceLoss(lat, &paths);
  CHECK(paths == 2);
  // Two alignments, each 0.25 * 0.5 * 0.5, total mass 0.125.
  CHECK(oracle == doctest::Approx(-std::log(0.125)).epsilon(1e-14));
  CHECK(std::abs(FullSumLoss(lat) - oracle) <= 1e-12);
  CHECK(FullSumLoss(lat) == doctest::Approx(2.0794415416798357).epsilon(1e-14));
}

TEST_CASE("path count is C(T-1+U, U)") {
  Rng rng(7);
  int64_t paths = 0;
  BruteForceLoss(RandomLattice(3, 2, &rng), &paths);
  CHECK(paths == 6);
  BruteForceLoss(RandomLattice(5, 4, &rng), &paths);
  CHECK(paths == 70);
}

TEST_CASE("full-sum equals brute force on random lattices") {
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    int T = 1 + rng.UniformInt(5), U = rng.UniformInt(5);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    worst = std::max(worst, std::abs(FullSumLoss(lat) - BruteForceLoss(lat)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("gradients match central differences") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    LogProbLattice lat = RandomLattice(4, 3, &rng);
    LatticeGradients g = LossGradients(lat);
    auto f = [&lat]() { return FullSumLoss(lat); };
    for (int t = 0; t < 4; ++t) {
      for (int u = 0; u <= 3; ++u) {
        double num = CentralDifference(&lat.Blank(t, u), f);
        CHECK(RelativeError(g.Blank(t, u), num) <= 1e-4);
        if (u < 3) {
          num = CentralDifference(&lat.Label(t, u), f);
          CHECK(RelativeError(g.Label(t, u), num) <= 1e-4);
        }
      }
    }
  }
}

TEST_CASE("one-path lattice has gradient -1 on every used entry") {
  // T = 1: all labels at frame 0, then the final blank.
  Rng rng(5);
  LogProbLattice lat = RandomLattice(1, 3, &rng);
  LatticeGradients g = LossGradients(lat);
  for (int u = 0; u < 3; ++u) CHECK(g.Label(0, u) == doctest::Approx(-1.0));
  CHECK(g.Blank(0, 3) == doctest::Approx(-1.0));
  for (int u = 0; u < 3; ++u) CHECK(g.Blank(0, u) == 0.0);
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(FullSumLoss(LogProbLattice(0, 2)), InvalidInput);

  LogProbLattice lat(3, 1);
  for (int u = 0; u <= 1; ++u) lat.Blank(1, u) = kLogZero;
  CHECK(std::isinf(FullSumLoss(lat)));
  CHECK(FullSumLoss(lat) > 0);
  LatticeGradients g = LossGradients(lat);
  CHECK(g.no_path_mass);
  for (int t = 0; t < 3; ++t)
    for (int u = 0; u <= 1; ++u) CHECK(g.Blank(t, u) == 0.0);

  LogProbLattice bad(2, 1);
  bad.Label(0, 0) = std::nan("");
  CHECK_THROWS_AS(FullSumLoss(bad), InvalidInput);
  bad.Label(0, 0) = 0.5;
  CHECK_THROWS_AS(FullSumLoss(bad), InvalidInput);
}

TEST_CASE("log-domain arithmetic never produces NaN") {
  CHECK(LogAdd(kLogZero, kLogZero) == kLogZero);
  CHECK(LogAdd(kLogZero, -3.0) == -3.0);
  std::vector<double> all_zero{kLogZero, kLogZero};
  CHECK(LogSumExp(all_zero) == kLogZero);

  Rng rng(9);
  LogProbLattice lat = RandomLattice(4, 2, &rng);
  lat.Label(1, 0) = kLogZero;
  lat.Blank(2, 2) = kLogZero;
  LatticeGradients g = LossGradients(lat);
  CHECK(std::isfinite(FullSumLoss(lat)));
  for (int t = 0; t < 4; ++t)
    for (int u = 0; u <= 2; ++u) {
      CHECK_FALSE(std::isnan(g.Blank(t, u)));
      if (u < 2) CHECK_FALSE(std::isnan(g.Label(t, u)));
    }
  CHECK(std::abs(FullSumLoss(lat) - BruteForceLoss(lat)) <= 1e-10);
}

TEST_CASE("brute force refuses oversized lattices") {
  LogProbLattice lat(30, 12);
  CHECK_THROWS_AS(BruteForceLoss(lat), SizeLimitExceeded);
}

TEST_CASE("restricted loss with the full band is the dense loss") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    int T = 1 + rng.UniformInt(6), U = rng.UniformInt(4);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    BandMask full = BandMask::Full(T, U);
    CHECK(RestrictedFullSumLoss(lat, full) == FullSumLoss(lat));
  }
}

TEST_CASE("restricted loss on random sub-masks") {
  Rng rng(17);
  int tested = 0;
  while (tested < 100) {
    int T = 2 + rng.UniformInt(4), U = 1 + rng.UniformInt(3);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    BandMask mask(T, U);
    for (int t = 0; t < T; ++t)
      for (int u = 0; u <= U; ++u) mask.SetValid(t, u, rng.Uniform() < 0.75);
    if (!mask.AdmitsPath()) {
      CHECK_THROWS_AS(RestrictedFullSumLoss(lat, mask), InvalidMask);
      continue;
    }
    ++tested;
    double restricted = RestrictedFullSumLoss(lat, mask);
    CHECK(restricted >= FullSumLoss(lat) - 1e-12);
    CHECK(std::abs(restricted - BruteForceRestrictedLoss(lat, mask)) <= 1e-10);

    // Gradients vanish outside the mask and match finite differences inside.
    LatticeGradients g = RestrictedLossGradients(lat, mask);
    auto f = [&]() { return RestrictedFullSumLoss(lat, mask); };
    for (int t = 0; t < T; ++t)
      for (int u = 0; u <= U; ++u) {
        if (!mask.Valid(t, u)) {
          CHECK(g.Blank(t, u) == 0.0);
          if (u < U) CHECK(g.Label(t, u) == 0.0);
        }
        double num = CentralDifference(&lat.Blank(t, u), f);
        CHECK(RelativeError(g.Blank(t, u), num) <= 1e-4);
      }
  }
}

TEST_CASE("mask admitting no path is rejected") {
  Rng rng(19);
  LogProbLattice lat = RandomLattice(3, 2, &rng);
  BandMask mask = BandMask::Full(3, 2);
  mask.SetValid(2, 2, false);
  CHECK_FALSE(mask.AdmitsPath());
  CHECK_THROWS_AS(RestrictedFullSumLoss(lat, mask), InvalidMask);
  CHECK_THROWS_AS(RestrictedFullSumLoss(lat, BandMask::Full(4, 2)), InvalidMask);
}

TEST_CASE("prune keeps exactly the nodes on complete paths") {
  BandMask mask = BandMask::Full(4, 2);
  mask.SetValid(0, 1, false);
  mask.SetValid(1, 1, false);
  mask.SetValid(2, 1, false);
  mask.SetValid(3, 1, false);  // row 1 unreachable: nothing survives
  CHECK(mask.NumPaths() == 0.0);
  mask.Prune();
  CHECK(mask.NumValid() == 0);

  BandMask dangling = BandMask::Full(3, 1);
  dangling.SetValid(0, 1, false);
  dangling.SetValid(1, 1, false);
  dangling.Prune();
  CHECK(dangling.NumPaths() == 1.0);
  CHECK(dangling.NumValid() == 4);
}

TEST_CASE("batch kernels agree with the serial reference bit for bit") {
  Rng rng(23);
  std::vector<LogProbLattice> lats;
  std::vector<BandMask> masks;
  for (int i = 0; i < 64; ++i) {
    int T = 1 + rng.UniformInt(20), U = rng.UniformInt(8);
    lats.push_back(RandomLattice(T, U, &rng));
    masks.push_back(BandMask::Full(T, U));
  }
  CHECK(BatchFullSumLoss(lats) == serial::BatchFullSumLoss(lats));
  std::vector<LatticeGradients> g1, g2;
  auto l1 = BatchLossAndGradients(lats, masks, &g1);
  auto l2 = serial::BatchLossAndGradients(lats, masks, &g2);
  CHECK(l1 == l2);
  for (size_t i = 0; i < lats.size(); ++i)
    for (int t = 0; t < lats[i].NumFrames(); ++t)
      CHECK(g1[i].Blank(t, 0) == g2[i].Blank(t, 0));
}

}  // namespace
}  // namespace ftilm
