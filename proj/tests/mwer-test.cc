// tests/mwer-test.cc


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
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"
#include "ftilm/mwer/mwer.h"
#include "test-util.h"

namespace ftilm {
namespace {

using testing::CentralDifference;
using testing::RandomLattice;
using testing::RelativeError;

std::vector<std::string> Words(const std::string &text) {
  std::istringstream in(text);
  std::vector<std::string> w;
  for (std::string s; in >> s;) w.push_back(s);
  return w;
}

std::vector<NBestItem> Items(std::vector<double> scores, std::vector<int> errors,
                             std::vector<double> ilm = {}) {
  std::vector<NBestItem> out(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i].full_sum_logprob = scores[i];
    out[i].word_errors = errors[i];
    out[i].ilm_logprob_sum = ilm.empty() ? 0.0 : ilm[i];
  }
  return out;
}

// Random non-decreasing alignment of U tokens over T frames.
std::vector<int> RandomAlignment(int T, int U, Rng *rng) {
  std::vector<int> a(U);
  for (int &x : a) x = rng->UniformInt(T);
  std::sort(a.begin(), a.end());
  return a;
}

// Negative log-probability of the single path given by an alignment.
double PathLoss(const LogProbLattice &lat, const std::vector<int> &a) {
  const int T = lat.NumFrames(), U = static_cast<int>(a.size());
  double lp = 0.0;
  int u = 0;
  for (int t = 0; t < T; ++t) {
    while (u < U && a[u] == t) lp += lat.Label(t, u++);
    lp += lat.Blank(t, u);
  }
  return -lp;
}

TEST_CASE("word edit distance") {
  CHECK(WordEditDistance(Words("a b c"), Words("a b c")) == 0);
  CHECK(WordEditDistance(Words("a b c"), Words("")) == 3);
  CHECK(WordEditDistance(Words(""), Words("x y")) == 2);
  // substitution cat/cats plus the deleted "down"
  CHECK(WordEditDistance(Words("the cat sat"), Words("the cats sat down")) == 2);
  std::vector<int> h{1, 2, 3, 4}, r{2, 3, 4, 5};
  CHECK(WordEditDistance<int>(h, r) == 2);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> x(rng.UniformInt(6)), y(rng.UniformInt(6));
    for (int &v : x) v = rng.UniformInt(3);
    for (int &v : y) v = rng.UniformInt(3);
    int d = WordEditDistance<int>(x, y);
    CHECK(d == WordEditDistance<int>(y, x));
    CHECK(d <= static_cast<int>(std::max(x.size(), y.size())));
    CHECK(d >= std::abs(static_cast<int>(x.size()) - static_cast<int>(y.size())));
  }
}

TEST_CASE("MWER loss examples") {
  CHECK(MwerLoss(Items({-1, -5, -9}, {2, 2, 2}), 0.0) == doctest::Approx(2.0));
  CHECK(MwerLoss(Items({-3, -3}, {0, 2}), 0.0) == doctest::Approx(1.0));

  // Long-double softmax oracle, cross-checked against mpmath at 30 digits.
  long double z = 0, num = 0;
  for (int i = 0; i < 3; ++i) {
    long double p = std::exp(-1.0L - i);
    z += p;
    num += p * i;
  }
  const double oracle = static_cast<double>(num / z);
  CHECK(oracle == doctest::Approx(0.42478961739555856847).epsilon(1e-14));
  CHECK(std::abs(MwerLoss(Items({-1, -2, -3}, {0, 1, 2}), 0.0) - oracle) <= 1e-14);

  // beta weighs the ILM sums into the posterior
  auto nb = Items({-1, -1}, {0, 1}, {0.0, -2.0});
  CHECK(MwerLoss(nb, 0.0) == doctest::Approx(0.5));
  CHECK(MwerLoss(nb, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
}

TEST_CASE("MWER loss properties") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    int n = 1 + rng.UniformInt(8);
    std::vector<double> s(n), ilm(n);
    std::vector<int> r(n);
    for (int j = 0; j < n; ++j) {
      s[j] = rng.Normal(-20.0, 10.0);
      ilm[j] = -rng.Uniform(0, 20);
      r[j] = rng.UniformInt(6);
    }
    double beta = rng.Uniform(0, 1);
    auto nb = Items(s, r, ilm);
    double loss = MwerLoss(nb, beta);
    CHECK(loss >= *std::min_element(r.begin(), r.end()) - 1e-12);
    CHECK(loss <= *std::max_element(r.begin(), r.end()) + 1e-12);
    for (auto &item : nb) item.full_sum_logprob += 37.5;
    CHECK(std::abs(MwerLoss(nb, beta) - loss) <= 1e-9);
  }
}

TEST_CASE("MWER degenerate inputs") {
  CHECK_THROWS_AS(MwerLoss(std::vector<NBestItem>{}, 0.0), DegenerateInput);
  CHECK_THROWS_AS(MwerLoss(Items({kLogZero, kLogZero}, {0, 1}), 0.0),
                  DegenerateInput);
  CHECK(MwerLoss(Items({kLogZero, -4.0}, {0, 3}), 0.0) == 3.0);
}

TEST_CASE("MWER gradients") {
  auto flat = MwerGradients(Items({-1, -2, -7}, {3, 3, 3}), 0.2);
  for (double g : flat) CHECK(g == 0.0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    int n = 2 + rng.UniformInt(6);
    std::vector<double> s(n), ilm(n);
    std::vector<int> r(n);
    for (int j = 0; j < n; ++j) {
      s[j] = rng.Normal(-5.0, 2.0);
      ilm[j] = -rng.Uniform(0, 5);
      r[j] = rng.UniformInt(5);
    }
    double beta = rng.Uniform(0, 1);
    auto nb = Items(s, r, ilm);
    auto g = MwerGradients(nb, beta);
    double sum = 0.0;
    for (double x : g) sum += x;
    CHECK(std::abs(sum) <= 1e-12);
    for (int j = 0; j < n; ++j) {
      double num = CentralDifference(&nb[j].full_sum_logprob,
                                     [&]() { return MwerLoss(nb, beta); });
      // floor keeps the check above finite-difference round-off (~1e-11)
      CHECK(RelativeError(g[j], num, 1e-4) <= 1e-6);
    }
    // one small step against the gradient lowers the loss
    if (*std::min_element(r.begin(), r.end()) ==
        *std::max_element(r.begin(), r.end()))
      continue;
    double before = MwerLoss(nb, beta);
    for (int j = 0; j < n; ++j) nb[j].full_sum_logprob -= 0.01 * g[j];
    CHECK(MwerLoss(nb, beta) < before);
  }
}

TEST_CASE("band: wide context is the full lattice") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    int T = 1 + rng.UniformInt(8), U = rng.UniformInt(4);
    auto a = RandomAlignment(T, U, &rng);
    BandMask band = BandFromAlignment(a, {T, T}, T);
    CHECK(band.NumValid() == T * (U + 1));
    LogProbLattice lat = RandomLattice(T, U, &rng);
    CHECK(RestrictedFullSumLoss(lat, band) == FullSumLoss(lat));
  }
}

TEST_CASE("band: zero context is the alignment path") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    int T = 1 + rng.UniformInt(8), U = rng.UniformInt(4);
    auto a = RandomAlignment(T, U, &rng);
    BandMask band = BandFromAlignment(a, {0, 0}, T);
    CHECK(band.NumPaths() == 1.0);
    CHECK(band.NumValid() == T + U);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    CHECK(RestrictedFullSumLoss(lat, band) == doctest::Approx(PathLoss(lat, a)));
  }
}

TEST_CASE("band: masked enumeration on T=8, U=3, C=2") {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    auto a = RandomAlignment(8, 3, &rng);
    BandMask band = BandFromAlignment(a, {2, 2}, 8);
    LogProbLattice lat = RandomLattice(8, 3, &rng);
    int64_t paths = 0;
    double oracle = BruteForceRestrictedLoss(lat, band, &paths);
    CHECK(static_cast<double>(paths) == band.NumPaths());
    CHECK(std::abs(RestrictedFullSumLoss(lat, band) - oracle) <= 1e-10);
  }
}

TEST_CASE("band soundness and monotonicity") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    int T = 2 + rng.UniformInt(12), U = rng.UniformInt(5);
    auto a = RandomAlignment(T, U, &rng);
    double prev_paths = 0.0;
    for (int c = 0; c <= 4; ++c) {
      BandMask band = BandFromAlignment(a, {c, c}, T);
      // the alignment's own path stays inside
      int u = 0;
      for (int t = 0; t < T; ++t) {
        while (u < U && a[u] == t) {
          CHECK(band.Valid(t, u));
          ++u;
        }
        CHECK(band.Valid(t, u));
      }
      // no label is emitted from row u outside [a_u+1 - C, a_u+1 + C]
      for (int t = 0; t < T; ++t)
        for (int uu = 0; uu < U; ++uu)
          if (band.Valid(t, uu) && band.Valid(t, uu + 1))
            CHECK(std::abs(t - a[uu]) <= c);
      CHECK(band.NumPaths() >= prev_paths);
      prev_paths = band.NumPaths();
    }
  }
}

TEST_CASE("band input errors") {
  std::vector<int> decreasing{3, 1};
  CHECK_THROWS_AS(BandFromAlignment(decreasing, {}, 5), InvalidInput);
  std::vector<int> late{1, 5};
  CHECK_THROWS_AS(BandFromAlignment(late, {}, 5), InvalidInput);
  CHECK_THROWS_AS(BandFromAlignment(late, {}, 0), InvalidInput);
}

TEST_CASE("combined loss") {
  CHECK(CombinedLoss(2.5, 9.0, 0.0) == 2.5);
  CHECK(CombinedLoss(0.0, 9.0, 1.0) == 9.0);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    double m = rng.Uniform(0, 5), r = rng.Uniform(0, 50), l = rng.Uniform(0, 1);
    double d = rng.Uniform(0, 1);
    CHECK(CombinedLoss(m + d, r, l) - CombinedLoss(m, r, l) == doctest::Approx(d));
    CHECK(CombinedLoss(m, r + d, l) - CombinedLoss(m, r, l) ==
          doctest::Approx(l * d));
  }
}

}  // namespace
}  // namespace ftilm
