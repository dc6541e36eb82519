// include/ftilm/decode/beam-search.h

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

#ifndef FTILM_DECODE_BEAM_SEARCH_H_
#define FTILM_DECODE_BEAM_SEARCH_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ftilm/factorization/factorized-scores.h"
#include "ftilm/ilm/language-model.h"

namespace ftilm {

struct Hypothesis {
  TokenSequence tokens;
  // Fused log-score summed (log-add-exp) over every alignment of `tokens`
  // the search kept.
  double score = 0.0;
  // Best single alignment: its score and the emission frame of each token.
  double viterbi_score = 0.0;
  std::vector<int> viterbi_alignment;
  LmState lm_state;
  LmState ext_lm_state;
  double ilm_logprob_sum = 0.0;
  double ext_lm_logprob_sum = 0.0;
};

enum class DecodeMode { kFactorized, kShallowFusion };

struct DecodeConfig {
  int beam_size = 5;
  FusionWeights weights;       // factorized mode
  bool length_norm = true;
  int max_symbols_per_frame = 5;
  DecodeMode mode = DecodeMode::kFactorized;
  double ext_lm_weight = 0.6;          // shallow-fusion mode only
  double ilm_subtract_weight = -0.2;   // shallow-fusion mode only, signed

  void Check() const;
};

// Acoustic side of the factorized transducer for one utterance.
class FrameScorer {
 public:
  virtual ~FrameScorer() = default;
  virtual int NumFrames() const = 0;
  virtual int VocabSize() const = 0;
  // Encoder projection at frame t (pre-LogSoftmax).
  virtual std::span<const double> AmLogits(int t) const = 0;
  // Blank joiner output at frame t after the given label history.
  virtual double BlankLogit(int t, const TokenSequence &history) const = 0;
};

// score / max(1, token_count)
double LengthNormalize(double score, int token_count);

// base + ext_weight * ext_lm_lp + ilm_weight * ilm_lp.  A negative
// ilm_weight subtracts the internal LM.
double ShallowFusionScore(double base_score, double ext_lm_lp, double ilm_lp,
                          double ext_weight, double ilm_weight);

double RankingScore(const Hypothesis &hyp, bool length_norm);

// Strict N-best order: higher ranking score, then higher viterbi_score, then
// lexicographically smaller token sequence.
bool RanksBefore(const Hypothesis &a, const Hypothesis &b, bool length_norm);

/*
  Frame-synchronous transducer beam search.

  At every frame each live hypothesis may emit up to max_symbols_per_frame
  labels before the blank that moves it to the next frame.  In factorized
  mode a label k after history h at frame t scores

    log(1 - P_b) + logsoftmax(log P_am + alpha log P_ilm)[k] + beta log P_ilm[k]

  and blank scores log P_b.  In shallow-fusion mode labels use the training
  normalization plus ext_lm_weight * log P_ext + ilm_subtract_weight *
  log P_ilm (needs ext_lm).

  Hypotheses with identical tokens are merged: scores by log-add-exp, the
  alignment of the higher-scoring single path is kept.  Returns at most
  beam_size complete hypotheses in RanksBefore order.  Throws InvalidInput
  for zero frames.
*/
std::vector<Hypothesis> BeamSearch(const FrameScorer &scorer,
                                   const LmInterface &ilm,
                                   const DecodeConfig &config,
                                   const LmInterface *ext_lm = nullptr);

// One utterance per worker; identical to the serial loop for any thread
// count.
std::vector<std::vector<Hypothesis>> BatchBeamSearch(
    std::span<const FrameScorer *const> scorers, const LmInterface &ilm,
    const DecodeConfig &config, const LmInterface *ext_lm = nullptr);

// Reference decoder for tiny instances: enumerates every path (per frame up
// to max_symbols_per_frame labels, then blank) and log-adds path scores per
// label sequence under the factorized rule.  Throws SizeLimitExceeded above
// max_paths.
struct ExhaustiveEntry {
  double score;
  double viterbi_score;
};
std::map<TokenSequence, ExhaustiveEntry> ExhaustiveDecode(
    const FrameScorer &scorer, const LmInterface &ilm,
    const FusionWeights &weights, int max_symbols_per_frame,
    int64_t max_paths = 1000000);

namespace serial {

std::vector<std::vector<Hypothesis>> BatchBeamSearch(
    std::span<const FrameScorer *const> scorers, const LmInterface &ilm,
    const DecodeConfig &config, const LmInterface *ext_lm = nullptr);

}  // namespace serial
}  // namespace ftilm

#endif  // FTILM_DECODE_BEAM_SEARCH_H_
