// tests/decode-test.cc


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
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"
#include "ftilm/decode/beam-search.h"
#include "ftilm/ilm/toy-neural-lm.h"
#include "test-util.h"

namespace ftilm {
namespace {

// Random acoustic logits per frame; the blank logit depends on the frame and
// the full label history through a hashed random stream.
class RandomScorer : public FrameScorer {
 public:
  RandomScorer(int T, int V, uint64_t seed, double blank_bias = 0.0)
      : T_(T), V_(V), seed_(seed), blank_bias_(blank_bias) {
    Rng rng(seed);
    am_.resize(T);
    for (auto &row : am_) {
      row.resize(V);
      for (double &x : row) x = rng.Normal(0.0, 1.5);
    }
  }
  int NumFrames() const override { return T_; }
  int VocabSize() const override { return V_; }
  std::span<const double> AmLogits(int t) const override { return am_[t]; }
  double BlankLogit(int t, const TokenSequence &history) const override {
    std::string key = std::to_string(t);
    for (int k : history) key += "," + std::to_string(k);
    return blank_bias_ + Rng::Stream(seed_, key).Normal();
  }

 private:
  int T_, V_;
  uint64_t seed_;
  double blank_bias_;
  std::vector<std::vector<double>> am_;
};

std::shared_ptr<ToyNeuralLm> RandomIlm(int V, uint64_t seed) {
  ToyLmConfig c;
  c.vocab_size = V;
  c.order = 2;
  c.embedding_dim = 3;
  c.hidden_dim = 4;
  c.init_scale = 1.0;
  return std::make_shared<ToyNeuralLm>(c, seed);
}

struct OracleEntry {
  double score = kLogZero;
  double viterbi = kLogZero;
};

// Enumerates every path (per frame: up to max_sym labels, then a blank) and
// sums path scores per label sequence using the decode rule directly.
std::map<TokenSequence, OracleEntry> EnumeratePaths(
    const FrameScorer &scorer, const LmInterface &ilm, FusionWeights w,
    int max_sym) {
  std::map<TokenSequence, OracleEntry> out;
  const int T = scorer.NumFrames(), V = scorer.VocabSize();
  std::function<void(int, int, TokenSequence &, double)> walk =
      [&](int t, int emitted, TokenSequence &tokens, double score) {
        LmState state = ilm.StartState();
        for (int k : tokens) state = ilm.Advance(state, k);
        const double b = scorer.BlankLogit(t, tokens);
        // blank: close the frame
        double closed = score + BlankLogProb(b).blank;
        if (t + 1 == T) {
          OracleEntry &e = out[tokens];
          e.score = LogAdd(e.score, closed);
          e.viterbi = std::max(e.viterbi, closed);
        } else {
          walk(t + 1, 0, tokens, closed);
        }
        if (emitted == max_sym) return;
        std::vector<double> ilm_lp = ilm.LogProbs(state);
        for (int k = 0; k < V; ++k) {
          double s = NonBlankDecodeScore(scorer.AmLogits(t), ilm_lp, b, w, k);
          tokens.push_back(k);
          walk(t, emitted + 1, tokens, score + s);
          tokens.pop_back();
        }
      };
  TokenSequence tokens;
  walk(0, 0, tokens, 0.0);
  return out;
}

DecodeConfig WideConfig(FusionWeights w, int max_sym) {
  DecodeConfig cfg;
  cfg.beam_size = 100000;
  cfg.weights = w;
  cfg.length_norm = false;
  cfg.max_symbols_per_frame = max_sym;
  return cfg;
}

TEST_CASE("blank-favored single frame decodes to the empty sequence") {
  RandomScorer scorer(1, 2, 1, /*blank_bias=*/12.0);
  UniformLm ilm(2);
  DecodeConfig cfg;
  auto nbest = BeamSearch(scorer, ilm, cfg);
  REQUIRE(!nbest.empty());
  CHECK(nbest[0].tokens.empty());
  CHECK(nbest[0].score == BlankLogProb(scorer.BlankLogit(0, {})).blank);
}

TEST_CASE("wide beam equals exhaustive search") {
  struct Case {
    int T, V, max_sym;
  };
  // T = 2 with one symbol per frame keeps U <= 2; the others enumerate
  // longer label sequences under the same per-frame cap.
  const Case cases[] = {{2, 3, 1}, {4, 3, 1}, {3, 3, 2}, {4, 2, 2}};
  const FusionWeights weights[] = {{1.0, 0.0}, {0.6, 0.6}, {1.0, 0.2}};
  uint64_t seed = 100;
  for (const Case &c : cases) {
    for (FusionWeights w : weights) {
      for (int rep = 0; rep < 3; ++rep, ++seed) {
        RandomScorer scorer(c.T, c.V, seed);
        auto ilm = RandomIlm(c.V, seed);
        auto oracle = EnumeratePaths(scorer, *ilm, w, c.max_sym);
        auto library = ftilm::ExhaustiveDecode(scorer, *ilm, w, c.max_sym);
        REQUIRE(library.size() == oracle.size());
        for (auto &[tokens, e] : library) {
          CHECK(std::abs(e.score - oracle[tokens].score) <= 1e-12);
          CHECK(e.viterbi_score == oracle[tokens].viterbi);
        }
        DecodeConfig cfg = WideConfig(w, c.max_sym);
        auto nbest = BeamSearch(scorer, *ilm, cfg);
        REQUIRE(nbest.size() == oracle.size());
        for (const Hypothesis &h : nbest) {
          REQUIRE(oracle.count(h.tokens));
          CHECK(std::abs(h.score - oracle[h.tokens].score) <= 1e-9);
          CHECK(std::abs(h.viterbi_score - oracle[h.tokens].viterbi) <= 1e-9);
        }
        // top-1 under both rankings
        for (bool ln : {false, true}) {
          const TokenSequence *best = nullptr;
          double best_score = kLogZero;
          for (auto &[tokens, e] : oracle) {
            double s = LengthNormalize(e.score, static_cast<int>(tokens.size()));
            double r = ln ? s : e.score;
            if (best == nullptr || r > best_score) {
              best = &tokens;
              best_score = r;
            }
          }
          cfg.length_norm = ln;
          CHECK(BeamSearch(scorer, *ilm, cfg)[0].tokens == *best);
        }
      }
    }
  }
}

TEST_CASE("decoder scores agree with the lattice full sum") {
  const int T = 4, V = 3, max_sym = 2;
  for (FusionWeights w : {FusionWeights{1.0, 0.0}, FusionWeights{0.6, 0.4}}) {
    RandomScorer scorer(T, V, 7);
    auto ilm = RandomIlm(V, 8);
    auto nbest = BeamSearch(scorer, *ilm, WideConfig(w, max_sym));
    int checked = 0;
    for (const Hypothesis &h : nbest) {
      const int U = static_cast<int>(h.tokens.size());
      if (U > max_sym) continue;  // the lattice has no per-frame cap
      FTScores s(T, U + 1, V);
      LmState state = ilm->StartState();
      double ilm_sum = 0.0;
      for (int u = 0; u <= U; ++u) {
        TokenSequence prefix(h.tokens.begin(), h.tokens.begin() + u);
        std::vector<double> lp = ilm->LogProbs(state);
        std::copy(lp.begin(), lp.end(), s.IlmLogits(u).begin());
        for (int t = 0; t < T; ++t) s.BlankLogit(t, u) = scorer.BlankLogit(t, prefix);
        if (u < U) {
          ilm_sum += lp[h.tokens[u]];
          state = ilm->Advance(state, h.tokens[u]);
        }
      }
      for (int t = 0; t < T; ++t) {
        auto am = scorer.AmLogits(t);
        std::copy(am.begin(), am.end(), s.AmLogits(t).begin());
      }
      double lattice = -FullSumLoss(BuildLattice(s, h.tokens, w.alpha));
      CHECK(std::abs(h.score - (lattice + w.beta * ilm_sum)) <= 1e-9);
      CHECK(std::abs(h.ilm_logprob_sum - ilm_sum) <= 1e-12);
      ++checked;
    }
    CHECK(checked == 1 + V + V * V);
  }
}

TEST_CASE("N-best invariants") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RandomScorer scorer(6, 4, seed);
    auto ilm = RandomIlm(4, seed);
    DecodeConfig cfg;
    cfg.beam_size = 4;
    cfg.weights = {0.6, 0.3};
    cfg.length_norm = seed % 2 == 0;
    auto nbest = BeamSearch(scorer, *ilm, cfg);
    CHECK(nbest.size() <= 4);
    std::set<TokenSequence> seen;
    for (size_t i = 0; i < nbest.size(); ++i) {
      const Hypothesis &h = nbest[i];
      CHECK(seen.insert(h.tokens).second);
      REQUIRE(h.viterbi_alignment.size() == h.tokens.size());
      for (size_t j = 0; j < h.tokens.size(); ++j) {
        CHECK(h.viterbi_alignment[j] >= 0);
        CHECK(h.viterbi_alignment[j] < 6);
        if (j > 0) CHECK(h.viterbi_alignment[j] >= h.viterbi_alignment[j - 1]);
      }
      CHECK(h.score >= h.viterbi_score);
      if (i > 0) CHECK(RanksBefore(nbest[i - 1], h, cfg.length_norm));
    }
  }
}

TEST_CASE("ties break by viterbi score, then tokens") {
  Hypothesis a, b;
  a.tokens = {2};
  b.tokens = {1, 1};
  a.score = b.score = -3.0;
  a.viterbi_score = -4.0;
  b.viterbi_score = -3.5;
  CHECK(RanksBefore(b, a, false));
  b.viterbi_score = -4.0;
  CHECK(RanksBefore(b, a, false));
  CHECK_FALSE(RanksBefore(a, b, false));
}

TEST_CASE("length normalization") {
  CHECK(LengthNormalize(-10.0, 5) == -2.0);
  CHECK(LengthNormalize(-10.0, 0) == -10.0);

  // Search a small grid for a pair whose order flips under normalization.
  bool found = false;
  for (int s1 = -1; s1 >= -20 && !found; --s1)
    for (int n1 = 0; n1 <= 10 && !found; ++n1)
      for (int s2 = -1; s2 >= -20 && !found; --s2)
        for (int n2 = 0; n2 <= 10 && !found; ++n2) {
          Hypothesis a, b;
          a.score = s1;
          a.tokens.assign(n1, 0);
          b.score = s2;
          b.tokens.assign(n2, 1);
          if (s1 > s2 && RanksBefore(b, a, true)) {
            found = true;
            MESSAGE("flip pair: (" << s1 << ", " << n1 << ") vs (" << s2
                                   << ", " << n2 << ")");
            CHECK(RanksBefore(a, b, false));
            CHECK(LengthNormalize(s2, n2) > LengthNormalize(s1, n1));
          }
        }
  CHECK(found);
}

TEST_CASE("shallow-fusion score") {
  CHECK(ShallowFusionScore(-2.0, -1.0, -3.0, 0.6, -0.2) ==
        doctest::Approx(-2.0 - 0.6 + 0.6));
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    double base = rng.Normal(), e = -rng.Uniform(0, 5), l = -rng.Uniform(0, 5);
    CHECK(ShallowFusionScore(base, e, l, 0.0, 0.0) == base);
    double d = rng.Uniform(0, 1);
    CHECK(ShallowFusionScore(base, e + d, l, 0.6, -0.2) -
              ShallowFusionScore(base, e, l, 0.6, -0.2) ==
          doctest::Approx(0.6 * d));
    CHECK(ShallowFusionScore(base, e, l + d, 0.6, -0.2) -
              ShallowFusionScore(base, e, l, 0.6, -0.2) ==
          doctest::Approx(-0.2 * d));
  }
}

TEST_CASE("shallow fusion with cancelling LMs is the training decode") {
  RandomScorer scorer(5, 3, 9);
  auto ilm = RandomIlm(3, 10);
  DecodeConfig plain = WideConfig(FusionWeights::Training(), 2);
  plain.beam_size = 6;
  DecodeConfig sf = plain;
  sf.mode = DecodeMode::kShallowFusion;
  sf.ext_lm_weight = 0.2;
  sf.ilm_subtract_weight = -0.2;
  auto a = BeamSearch(scorer, *ilm, plain);
  auto b = BeamSearch(scorer, *ilm, sf, ilm.get());
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(std::abs(a[i].score - b[i].score) <= 1e-9);
    CHECK(std::abs(b[i].ext_lm_logprob_sum - b[i].ilm_logprob_sum) <= 1e-12);
  }
}

TEST_CASE("exhaustive decode refuses large instances") {
  RandomScorer scorer(8, 3, 1);
  UniformLm ilm(3);
  CHECK_THROWS_AS(ftilm::ExhaustiveDecode(scorer, ilm, {}, 5), SizeLimitExceeded);
}

TEST_CASE("decode errors") {
  UniformLm ilm(3);
  CHECK_THROWS_AS(BeamSearch(RandomScorer(0, 3, 1), ilm, {}), InvalidInput);
  CHECK_THROWS_AS(BeamSearch(RandomScorer(2, 4, 1), ilm, {}), InvalidInput);
  DecodeConfig sf;
  sf.mode = DecodeMode::kShallowFusion;
  CHECK_THROWS_AS(BeamSearch(RandomScorer(2, 3, 1), ilm, sf), InvalidInput);
  DecodeConfig bad;
  bad.beam_size = 0;
  CHECK_THROWS_AS(BeamSearch(RandomScorer(2, 3, 1), ilm, bad), ConfigError);
}

TEST_CASE("batch decode matches the serial loop") {
  std::vector<std::unique_ptr<RandomScorer>> owned;
  std::vector<const FrameScorer *> scorers;
  for (uint64_t i = 0; i < 16; ++i) {
    owned.push_back(std::make_unique<RandomScorer>(3 + i % 5, 4, i));
    scorers.push_back(owned.back().get());
  }
  auto ilm = RandomIlm(4, 1);
  DecodeConfig cfg;
  auto a = BatchBeamSearch(scorers, *ilm, cfg);
  auto b = serial::BatchBeamSearch(scorers, *ilm, cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (size_t j = 0; j < a[i].size(); ++j) {
      CHECK(a[i][j].tokens == b[i][j].tokens);
      CHECK(a[i][j].score == b[i][j].score);
      CHECK(a[i][j].viterbi_alignment == b[i][j].viterbi_alignment);
    }
  }
}

}  // namespace
}  // namespace ftilm
