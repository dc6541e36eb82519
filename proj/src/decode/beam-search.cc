// src/decode/beam-search.cc

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

#include "ftilm/decode/beam-search.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"
#include "ftilm/base/parallel.h"

namespace ftilm {

void DecodeConfig::Check() const {
  if (beam_size < 1) throw ConfigError("DecodeConfig: beam_size must be >= 1");
  if (max_symbols_per_frame < 1)
    throw ConfigError("DecodeConfig: max_symbols_per_frame must be >= 1");
  weights.Check();
}

double LengthNormalize(double score, int token_count) {
  return score / static_cast<double>(std::max(1, token_count));
}

double ShallowFusionScore(double base_score, double ext_lm_lp, double ilm_lp,
                          double ext_weight, double ilm_weight) {
  return base_score + ext_weight * ext_lm_lp + ilm_weight * ilm_lp;
}

double RankingScore(const Hypothesis &hyp, bool length_norm) {
  return length_norm
             ? LengthNormalize(hyp.score, static_cast<int>(hyp.tokens.size()))
             : hyp.score;
}

bool RanksBefore(const Hypothesis &a, const Hypothesis &b, bool length_norm) {
  double sa = RankingScore(a, length_norm), sb = RankingScore(b, length_norm);
  if (sa != sb) return sa > sb;
  if (a.viterbi_score != b.viterbi_score)
    return a.viterbi_score > b.viterbi_score;
  return a.tokens < b.tokens;
}

namespace {

using HypMap = std::map<TokenSequence, Hypothesis>;

void MergeInto(HypMap *map, Hypothesis &&hyp) {
  auto it = map->find(hyp.tokens);
  if (it == map->end()) {
    TokenSequence key = hyp.tokens;
    map->emplace(std::move(key), std::move(hyp));
    return;
  }
  Hypothesis &kept = it->second;
  kept.score = LogAdd(kept.score, hyp.score);
  if (hyp.viterbi_score > kept.viterbi_score) {
    kept.viterbi_score = hyp.viterbi_score;
    kept.viterbi_alignment = std::move(hyp.viterbi_alignment);
  }
}

std::vector<Hypothesis> TopK(HypMap *map, int k, bool length_norm) {
  std::vector<Hypothesis> hyps;
  hyps.reserve(map->size());
  for (auto &entry : *map) hyps.push_back(std::move(entry.second));
  map->clear();
  auto before = [length_norm](const Hypothesis &a, const Hypothesis &b) {
    return RanksBefore(a, b, length_norm);
  };
  if (static_cast<int>(hyps.size()) > k) {
    std::partial_sort(hyps.begin(), hyps.begin() + k, hyps.end(), before);
    hyps.resize(k);
  } else {
    std::sort(hyps.begin(), hyps.end(), before);
  }
  return hyps;
}

// Per-utterance cache of LM log-probs keyed by the token history.
class LmCache {
 public:
  explicit LmCache(const LmInterface *lm) : lm_(lm) {}
  const std::vector<double> &Get(const TokenSequence &history,
                                 const LmState &state) {
    auto it = cache_.find(history);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(history, lm_->LogProbs(state)).first->second;
  }

 private:
  const LmInterface *lm_;
  std::map<TokenSequence, std::vector<double>> cache_;
};

}  // namespace

std::vector<Hypothesis> BeamSearch(const FrameScorer &scorer,
                                   const LmInterface &ilm,
                                   const DecodeConfig &config,
                                   const LmInterface *ext_lm) {
  config.Check();
  const int T = scorer.NumFrames(), V = scorer.VocabSize();
  if (T <= 0) throw InvalidInput("BeamSearch: utterance has no frames");
  if (ilm.VocabSize() != V)
    throw InvalidInput("BeamSearch: ILM vocabulary does not match scorer");
  const bool fusion = config.mode == DecodeMode::kShallowFusion;
  if (fusion && (ext_lm == nullptr || ext_lm->VocabSize() != V))
    throw InvalidInput("BeamSearch: shallow fusion needs a matching external LM");

  LmCache ilm_cache(&ilm), ext_cache(ext_lm);
  const FusionWeights weights =
      fusion ? FusionWeights::Training() : config.weights;

  Hypothesis start;
  start.lm_state = ilm.StartState();
  if (fusion) start.ext_lm_state = ext_lm->StartState();
  std::vector<Hypothesis> beam{start};

  for (int t = 0; t < T; ++t) {
    std::span<const double> am = scorer.AmLogits(t);
    HypMap next_frame;
    std::vector<Hypothesis> current = std::move(beam);
    for (int s = 0; s <= config.max_symbols_per_frame && !current.empty();
         ++s) {
      HypMap expanded;
      for (Hypothesis &hyp : current) {
        const std::vector<double> &ilm_lp = ilm_cache.Get(hyp.tokens,
                                                          hyp.lm_state);
        const double blank_logit = scorer.BlankLogit(t, hyp.tokens);
        const double blank_lp = BlankLogProb(blank_logit).blank;

        if (s < config.max_symbols_per_frame) {
          std::vector<double> label = NonBlankDecodeScores(am, ilm_lp,
                                                           blank_logit, weights);
          const std::vector<double> *ext_lp = nullptr;
          if (fusion) {
            ext_lp = &ext_cache.Get(hyp.tokens, hyp.ext_lm_state);
            for (int k = 0; k < V; ++k)
              label[k] = ShallowFusionScore(label[k], (*ext_lp)[k], ilm_lp[k],
                                            config.ext_lm_weight,
                                            config.ilm_subtract_weight);
          }
          for (int k = 0; k < V; ++k) {
            Hypothesis ext;
            ext.tokens = hyp.tokens;
            ext.tokens.push_back(k);
            ext.score = hyp.score + label[k];
            ext.viterbi_score = hyp.viterbi_score + label[k];
            ext.viterbi_alignment = hyp.viterbi_alignment;
            ext.viterbi_alignment.push_back(t);
            ext.lm_state = ilm.Advance(hyp.lm_state, k);
            ext.ilm_logprob_sum = hyp.ilm_logprob_sum + ilm_lp[k];
            if (fusion) {
              ext.ext_lm_state = ext_lm->Advance(hyp.ext_lm_state, k);
              ext.ext_lm_logprob_sum = hyp.ext_lm_logprob_sum + (*ext_lp)[k];
            }
            MergeInto(&expanded, std::move(ext));
          }
        }

        hyp.score += blank_lp;
        hyp.viterbi_score += blank_lp;
        MergeInto(&next_frame, std::move(hyp));
      }
      current = TopK(&expanded, config.beam_size, false);
    }
    beam = TopK(&next_frame, config.beam_size, false);
  }

  std::sort(beam.begin(), beam.end(),
            [&config](const Hypothesis &a, const Hypothesis &b) {
              return RanksBefore(a, b, config.length_norm);
            });
  return beam;
}

std::vector<std::vector<Hypothesis>> BatchBeamSearch(
    std::span<const FrameScorer *const> scorers, const LmInterface &ilm,
    const DecodeConfig &config, const LmInterface *ext_lm) {
  std::vector<std::vector<Hypothesis>> out(scorers.size());
  ParallelFor(scorers.size(), [&](size_t i) {
    out[i] = BeamSearch(*scorers[i], ilm, config, ext_lm);
  });
  return out;
}

std::map<TokenSequence, ExhaustiveEntry> ExhaustiveDecode(
    const FrameScorer &scorer, const LmInterface &ilm,
    const FusionWeights &weights, int max_symbols_per_frame,
    int64_t max_paths) {
  const int T = scorer.NumFrames(), V = scorer.VocabSize();
  if (T <= 0) throw InvalidInput("ExhaustiveDecode: utterance has no frames");
  // paths per frame: sum_{s <= S} V^s
  double per_frame = 0.0, power = 1.0;
  for (int s = 0; s <= max_symbols_per_frame; ++s, power *= V) per_frame += power;
  if (std::pow(per_frame, T) > static_cast<double>(max_paths))
    throw SizeLimitExceeded("ExhaustiveDecode: too many paths to enumerate");

  std::map<TokenSequence, ExhaustiveEntry> out;
  TokenSequence tokens;
  // Depth-first over (frame, labels emitted in this frame).
  auto walk = [&](auto &&self, int t, int emitted, const LmState &state,
                  double score) -> void {
    const double b = scorer.BlankLogit(t, tokens);
    const double closed = score + BlankLogProb(b).blank;
    if (t + 1 == T) {
      auto [it, fresh] = out.try_emplace(tokens, ExhaustiveEntry{closed, closed});
      if (!fresh) {
        it->second.score = LogAdd(it->second.score, closed);
        it->second.viterbi_score = std::max(it->second.viterbi_score, closed);
      }
    } else {
      self(self, t + 1, 0, state, closed);
    }
    if (emitted == max_symbols_per_frame) return;
    const std::vector<double> lp = ilm.LogProbs(state);
    const std::vector<double> label =
        NonBlankDecodeScores(scorer.AmLogits(t), lp, b, weights);
    for (int k = 0; k < V; ++k) {
      tokens.push_back(k);
      self(self, t, emitted + 1, ilm.Advance(state, k), score + label[k]);
      tokens.pop_back();
    }
  };
  walk(walk, 0, 0, ilm.StartState(), 0.0);
  return out;
}

namespace serial {

std::vector<std::vector<Hypothesis>> BatchBeamSearch(
    std::span<const FrameScorer *const> scorers, const LmInterface &ilm,
    const DecodeConfig &config, const LmInterface *ext_lm) {
  std::vector<std::vector<Hypothesis>> out;
  out.reserve(scorers.size());
  for (const FrameScorer *scorer : scorers)
    out.push_back(BeamSearch(*scorer, ilm, config, ext_lm));
  return out;
}

}  // namespace serial
}  // namespace ftilm
