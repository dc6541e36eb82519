// src/harness/checks.cc


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

#include "ftilm/harness/checks.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "ftilm/base/log-math.h"
#include "ftilm/base/rng.h"
#include "ftilm/decode/beam-search.h"
#include "ftilm/factorization/factorized-scores.h"
#include "ftilm/harness/recipes.h"
#include "ftilm/ilm/toy-neural-lm.h"
#include "ftilm/lattice/transducer-lattice.h"
#include "ftilm/mwer/mwer.h"

namespace ftilm {

using nlohmann::json;

json ToJson(const std::vector<CheckResult> &checks) {
  json out = json::array();
  for (const auto &c : checks)
    out.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  return out;
}

bool AllPassed(const std::vector<CheckResult> &checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult &c) { return c.passed; });
}

double RelativeGradientError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

constexpr double kEps = 1e-5;

double CentralDifference(double *x, const std::function<double()> &f) {
  const double saved = *x;
  *x = saved + kEps;
  const double plus = f();
  *x = saved - kEps;
  const double minus = f();
  *x = saved;
  return (plus - minus) / (2.0 * kEps);
}

CheckResult Make(const std::string &name, double value, double tolerance,
                 const std::string &detail) {
  return {name, value <= tolerance, value, tolerance, detail};
}

LogProbLattice RandomLattice(int T, int U, Rng *rng) {
  LogProbLattice lat(T, U);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u <= U; ++u) {
      lat.Blank(t, u) = std::log(rng->Uniform(0.05, 0.95));
      if (u < U) lat.Label(t, u) = std::log(rng->Uniform(0.05, 0.95));
    }
  return lat;
}

std::vector<double> RandomVector(int n, Rng *rng, double scale) {
  std::vector<double> v(n);
  for (double &x : v) x = rng->Normal(0.0, scale);
  return v;
}

// Random acoustic logits; blank logits hashed from (frame, history).
class RandomScorer : public FrameScorer {
 public:
  RandomScorer(int T, int V, uint64_t seed) : T_(T), V_(V), seed_(seed) {
    Rng rng(seed);
    for (int t = 0; t < T; ++t) am_.push_back(RandomVector(V, &rng, 1.5));
  }
  int NumFrames() const override { return T_; }
  int VocabSize() const override { return V_; }
  std::span<const double> AmLogits(int t) const override { return am_[t]; }
  double BlankLogit(int t, const TokenSequence &history) const override {
    std::string key = std::to_string(t);
    for (int k : history) key += "," + std::to_string(k);
    return Rng::Stream(seed_, key).Normal();
  }

 private:
  int T_, V_;
  uint64_t seed_;
  std::vector<std::vector<double>> am_;
};

ToyNeuralLm SmallLm(int V, uint64_t seed) {
  ToyLmConfig c;
  c.vocab_size = V;
  c.order = 2;
  c.embedding_dim = 3;
  c.hidden_dim = 4;
  c.init_scale = 1.0;
  return ToyNeuralLm(c, seed);
}

CheckResult LatticeGradientCheck(uint64_t seed) {
  Rng rng = Rng::Stream(seed, "check-lattice-grad");
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    LogProbLattice lat = RandomLattice(4, 3, &rng);
    LatticeGradients g = LossGradients(lat);
    auto f = [&lat]() { return FullSumLoss(lat); };
    for (int t = 0; t < 4; ++t)
      for (int u = 0; u <= 3; ++u) {
        worst = std::max(worst, RelativeGradientError(
                                    g.Blank(t, u), CentralDifference(&lat.Blank(t, u), f), 1e-6));
        if (u < 3)
          worst = std::max(worst, RelativeGradientError(
                                      g.Label(t, u), CentralDifference(&lat.Label(t, u), f), 1e-6));
      }
  }
  return Make("gradient/lattice", worst, 1e-4, "5 random 4x3 lattices, every entry");
}

CheckResult IlmGradientCheck(uint64_t seed) {
  ToyLmConfig c;
  c.vocab_size = 5;
  c.order = 3;
  c.embedding_dim = 4;
  c.hidden_dim = 5;
  c.init_scale = 0.5;
  ToyNeuralLm lm(c, seed);
  std::vector<TokenSequence> corpus{{1, 2, 3, 0}, {4, 4, 1, 0}};
  std::vector<double> grad(lm.Params().size(), 0.0);
  int64_t tokens = 0;
  lm.NllAndGradient(corpus, &grad, &tokens);
  auto loss = [&]() { return IlmLoss(lm, corpus, 0); };
  double worst = 0.0;
  for (size_t i = 0; i < grad.size(); ++i)
    worst = std::max(worst, RelativeGradientError(
                                grad[i] / tokens, CentralDifference(&lm.Params()[i], loss), 1e-6));
  return Make("gradient/ilm", worst, 1e-4,
              std::to_string(grad.size()) + " parameters, 2 sentences");
}

std::vector<CheckResult> FtGradientChecks(uint64_t seed) {
  DataConfig d;
  d.seed = seed;
  d.num_common = 4;
  d.num_rare = 1;
  d.feature_dim = 3;
  d.max_words = 4;
  d.num_train = 1;
  d.num_dev = 1;
  d.num_text = 4;
  d.rare_max_freq = 1.0;
  ToyCorpus corpus = GenerateCorpus(d);
  const int V = corpus.vocab.Size();
  ToyNeuralLm lm = SmallLm(V, seed);
  FtModelConfig mc;
  mc.vocab_size = V;
  mc.feature_dim = d.feature_dim;
  mc.context = 1;
  mc.hidden_dim = 4;
  mc.joint_dim = 3;
  mc.blank_embedding_dim = 2;
  mc.init_scale = 0.5;
  ToyFTModel model(mc, seed);
  std::vector<PreparedUtterance> prep = Prepare(corpus.train, corpus.vocab, lm);
  BandMask band = BandFromAlignment(prep[0].utt->alignment, {1, 1},
                                    prep[0].utt->num_frames);

  std::vector<CheckResult> out;
  const BandMask *masks[] = {nullptr, &band};
  for (const BandMask *mask : masks) {
    std::vector<double> grad(model.ParamVector().size(), 0.0);
    UtteranceLoss(model, prep[0], mask, 1.0, &grad);
    auto loss = [&]() { return UtteranceLoss(model, prep[0], mask, 1.0, nullptr); };
    double worst = 0.0;
    for (size_t i = 0; i < grad.size(); ++i)
      worst = std::max(worst, RelativeGradientError(
                                  grad[i], CentralDifference(&model.Params()[i], loss), 1e-6));
    out.push_back(Make(mask ? "gradient/ft-model-banded" : "gradient/ft-model", worst,
                       1e-4, std::to_string(grad.size()) + " parameters, T=" +
                                 std::to_string(prep[0].utt->num_frames) + ", U=" +
                                 std::to_string(prep[0].tokens.size())));
  }
  return out;
}

std::vector<NBestItem> RandomNBest(int n, Rng *rng, double spread) {
  std::vector<NBestItem> nb(n);
  for (auto &item : nb) {
    item.full_sum_logprob = rng->Normal(-5.0 * spread, 2.0 * spread);
    item.ilm_logprob_sum = -rng->Uniform(0.0, 5.0 * spread);
    item.word_errors = rng->UniformInt(6);
  }
  return nb;
}

CheckResult MwerGradientCheck(uint64_t seed) {
  Rng rng = Rng::Stream(seed, "check-mwer-grad");
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto nb = RandomNBest(2 + rng.UniformInt(6), &rng, 1.0);
    const double beta = rng.Uniform(0.0, 1.0);
    std::vector<double> g = MwerGradients(nb, beta);
    for (size_t j = 0; j < nb.size(); ++j) {
      double num = CentralDifference(&nb[j].full_sum_logprob,
                                     [&]() { return MwerLoss(nb, beta); });
      // the floor sits above central-difference round-off (~1e-11)
      worst = std::max(worst, RelativeGradientError(g[j], num, 1e-4));
    }
  }
  return Make("gradient/mwer", worst, 1e-6, "100 random N-best lists, floor 1e-4");
}

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

std::vector<int> RandomAlignment(int T, int U, Rng *rng) {
  std::vector<int> a(U);
  for (int &x : a) x = rng->UniformInt(T);
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

std::vector<CheckResult> GradientChecks(uint64_t seed) {
  std::vector<CheckResult> out{LatticeGradientCheck(seed), IlmGradientCheck(seed)};
  for (auto &c : FtGradientChecks(seed)) out.push_back(c);
  out.push_back(MwerGradientCheck(seed));
  return out;
}

CheckResult LatticeOracleCheck(uint64_t seed, int num_lattices) {
  Rng rng = Rng::Stream(seed, "check-lattice-oracle");
  double worst = 0.0;
  for (int i = 0; i < num_lattices; ++i) {
    int T = 1 + rng.UniformInt(5), U = rng.UniformInt(5);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    worst = std::max(worst, std::abs(FullSumLoss(lat) - BruteForceLoss(lat)));
  }
  return Make("oracle/lattice-brute-force", worst, 1e-10,
              std::to_string(num_lattices) + " random lattices, T<=5, U<=4");
}

CheckResult NormalizationCheck(uint64_t seed, int num_cells) {
  Rng rng = Rng::Stream(seed, "check-normalization");
  double worst = 0.0;
  for (int i = 0; i < num_cells; ++i) {
    int V = 2 + rng.UniformInt(30);
    auto am = RandomVector(V, &rng, 2.0), ilm = RandomVector(V, &rng, 2.0);
    double b = rng.Normal(0.0, 3.0);
    double total = std::exp(BlankLogProb(b).blank);
    for (double x : NonBlankTrainLogProbs(am, ilm, b)) total += std::exp(x);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return Make("oracle/normalization", worst, 1e-12,
              std::to_string(num_cells) + " random cells");
}

CheckResult ReductionIdentityCheck(uint64_t seed, int num_cells) {
  Rng rng = Rng::Stream(seed, "check-reduction");
  int mismatches = 0;
  for (int i = 0; i < num_cells; ++i) {
    int V = 2 + rng.UniformInt(30);
    auto am = RandomVector(V, &rng, 2.0), ilm = RandomVector(V, &rng, 2.0);
    double b = rng.Normal(0.0, 3.0);
    auto train = NonBlankTrainLogProbs(am, ilm, b);
    auto decode = NonBlankDecodeScores(am, ilm, b, FusionWeights{1.0, 0.0});
    for (int k = 0; k < V; ++k)
      if (train[k] != decode[k] ||
          NonBlankDecodeScore(am, ilm, b, FusionWeights{1.0, 0.0}, k) != train[k])
        ++mismatches;
  }
  return Make("oracle/reduction-identity", mismatches, 0.0,
              std::to_string(num_cells) + " random cells, all tokens, bitwise");
}

std::vector<CheckResult> BandChecks(uint64_t seed) {
  Rng rng = Rng::Stream(seed, "check-band");
  double full_gap = 0.0, monotone = 0.0, single = 0.0, masked = 0.0;
  for (int i = 0; i < 100; ++i) {
    int T = 1 + rng.UniformInt(8), U = rng.UniformInt(4);
    auto a = RandomAlignment(T, U, &rng);
    LogProbLattice lat = RandomLattice(T, U, &rng);
    const double dense = FullSumLoss(lat);
    full_gap = std::max(full_gap, std::abs(
        RestrictedFullSumLoss(lat, BandFromAlignment(a, {T, T}, T)) - dense));
    single = std::max(single, std::abs(
        RestrictedFullSumLoss(lat, BandFromAlignment(a, {0, 0}, T)) - PathLoss(lat, a)));
    double wider = dense;
    for (int c = T; c >= 0; --c) {
      double l = RestrictedFullSumLoss(lat, BandFromAlignment(a, {c, c}, T));
      monotone = std::max(monotone, wider - l);   // > 0 means a decrease
      wider = l;
    }
    BandMask band = BandFromAlignment(a, {2, 2}, T);
    masked = std::max(masked, std::abs(RestrictedFullSumLoss(lat, band) -
                                       BruteForceRestrictedLoss(lat, band)));
  }
  return {Make("oracle/band-full", full_gap, 0.0, "C >= T equals dense, exact"),
          Make("oracle/band-monotone", monotone, 0.0,
               "loss never decreases as the band narrows"),
          Make("oracle/band-single-path", single, 1e-12,
               "C = 0 equals the alignment path's negative log-probability"),
          Make("oracle/band-brute-force", masked, 1e-10,
               "masked enumeration, T <= 8, U <= 3, C = 2")};
}

CheckResult BeamOracleCheck(uint64_t seed) {
  const FusionWeights weights[] = {{1.0, 0.0}, {0.6, 0.6}, {1.0, 0.2}};
  int instances = 0, failures = 0;
  double worst = 0.0;
  for (int T = 1; T <= 4; ++T)
    for (int V = 1; V <= 3; ++V)
      for (int max_sym = 1; max_sym <= 2; ++max_sym)
        for (const FusionWeights &w : weights)
          for (int rep = 0; rep < 2; ++rep) {
            const uint64_t s = seed * 7919 + instances;
            RandomScorer scorer(T, V, s);
            ToyNeuralLm ilm = SmallLm(V, s);
            auto oracle = ExhaustiveDecode(scorer, ilm, w, max_sym);
            // oracle top-1 under the decoder's own order
            Hypothesis best;
            bool have = false;
            for (auto &[tokens, e] : oracle) {
              Hypothesis h;
              h.tokens = tokens;
              h.score = e.score;
              h.viterbi_score = e.viterbi_score;
              if (!have || RanksBefore(h, best, false)) best = h;
              have = true;
            }
            DecodeConfig cfg;
            cfg.beam_size = static_cast<int>(oracle.size());
            cfg.weights = w;
            cfg.length_norm = false;
            cfg.max_symbols_per_frame = max_sym;
            auto nbest = BeamSearch(scorer, ilm, cfg);
            ++instances;
            if (nbest.empty() || nbest[0].tokens != best.tokens) {
              ++failures;
              continue;
            }
            worst = std::max(worst, std::abs(nbest[0].score - best.score));
          }
  CheckResult r = Make("oracle/beam-search", failures == 0 ? worst : 1e300, 1e-9,
                       std::to_string(instances) +
                           " instances (T<=4, V<=3, 1-2 symbols per frame, 3 weight "
                           "settings); top-1 mismatches: " + std::to_string(failures));
  return r;
}

CheckResult MwerPropertyCheck(uint64_t seed, int num_lists) {
  Rng rng = Rng::Stream(seed, "check-mwer-props");
  double bound_violation = 0.0, shift = 0.0;
  for (int i = 0; i < num_lists; ++i) {
    auto nb = RandomNBest(1 + rng.UniformInt(8), &rng, 4.0);
    const double beta = rng.Uniform(0.0, 1.0);
    const double loss = MwerLoss(nb, beta);
    int lo = nb[0].word_errors, hi = lo;
    for (const auto &item : nb) {
      lo = std::min(lo, item.word_errors);
      hi = std::max(hi, item.word_errors);
    }
    bound_violation = std::max({bound_violation, lo - loss, loss - hi});
    const double c = rng.Normal(0.0, 50.0);
    for (auto &item : nb) item.full_sum_logprob += c;
    shift = std::max(shift, std::abs(MwerLoss(nb, beta) - loss));
  }
  std::ostringstream detail;
  detail << num_lists << " lists; worst bound violation " << bound_violation
         << ", worst shift change " << shift;
  const bool ok = bound_violation <= 1e-12 && shift <= 1e-9;
  return {"oracle/mwer-properties", ok, std::max(bound_violation, shift), 1e-9,
          detail.str()};
}

std::vector<CheckResult> OracleChecks(uint64_t seed) {
  std::vector<CheckResult> out{LatticeOracleCheck(seed), NormalizationCheck(seed),
                               ReductionIdentityCheck(seed)};
  for (auto &c : BandChecks(seed)) out.push_back(c);
  out.push_back(BeamOracleCheck(seed));
  out.push_back(MwerPropertyCheck(seed));
  return out;
}

}  // namespace ftilm
