// include/ftilm/harness/recipes.h


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

#ifndef FTILM_HARNESS_RECIPES_H_
#define FTILM_HARNESS_RECIPES_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ftilm/decode/beam-search.h"
#include "ftilm/harness/corpus.h"
#include "ftilm/harness/metrics.h"
#include "ftilm/harness/toy-ft-model.h"
#include "ftilm/ilm/toy-neural-lm.h"
#include "ftilm/mwer/mwer.h"

namespace ftilm {

// Adam on a flat parameter vector.
class Adam {
 public:
  Adam(size_t num_params, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);
  void Step(std::span<double> params, const std::vector<double> &grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t step_ = 0;
  std::vector<double> m_, v_;
};

// Training utterance with its token ids and the (frozen) LM rows for its
// prefixes, computed once.
struct PreparedUtterance {
  const Utterance *utt = nullptr;
  TokenSequence tokens;
  std::vector<std::vector<double>> ilm_rows;
};

std::vector<PreparedUtterance> Prepare(const std::vector<Utterance> &utts,
                                       const Vocabulary &vocab,
                                       const LmInterface &ilm);

// Transducer loss of one utterance (optionally restricted to mask) and its
// parameter gradient scaled by `scale` added into *grad.
double UtteranceLoss(const ToyFTModel &model, const PreparedUtterance &prep,
                     const BandMask *mask, double scale,
                     std::vector<double> *grad);

struct TrainConfig {
  int steps = 1500;
  int batch_size = 16;
  double learning_rate = 0.01;
  bool banded = false;        // restrict to a band around the gold alignment
  BandConfig band;
  uint64_t seed = 0;          // minibatch sampling
};

struct TrainResult {
  std::vector<double> loss_curve;   // mean per-utterance loss of each batch
};

// Trains the encoder and blank predictor against the frozen ILM.  Throws
// TrainingDiverged on a non-finite batch loss.
TrainResult TrainFt(ToyFTModel *model, const FrozenLm &ilm,
                    const std::vector<PreparedUtterance> &train,
                    const TrainConfig &config);

std::vector<std::vector<Hypothesis>> DecodeUtterances(
    const ToyFTModel &model, const LmInterface &ilm,
    const std::vector<Utterance> &utts, const DecodeConfig &config);

struct EvalResult {
  WordErrorStats stats;
  std::vector<std::vector<std::string>> hyps;   // top-1 words per utterance
};

EvalResult Evaluate(const ToyFTModel &model, const LmInterface &ilm,
                    const std::vector<Utterance> &utts, const Vocabulary &vocab,
                    const std::set<std::string> &rare_words,
                    const DecodeConfig &config);

struct SweepCell {
  double alpha = 1.0;
  double beta = 0.0;
  WordErrorStats stats;
};

struct SweepResult {
  std::vector<SweepCell> cells;   // alpha-major grid order
  size_t best = 0;                // lowest WER, then lowest rare-word WER,
                                  // then first in grid order
};

SweepResult Sweep(const ToyFTModel &model, const LmInterface &ilm,
                  const std::vector<Utterance> &utts, const Vocabulary &vocab,
                  const std::set<std::string> &rare_words,
                  const std::vector<double> &alphas,
                  const std::vector<double> &betas, const DecodeConfig &base);

// beam 5 without length normalization, as the N-best for MWER is scored
// unnormalized.
inline DecodeConfig MwerDecodeDefaults() {
  DecodeConfig c;
  c.beam_size = 5;
  c.length_norm = false;
  return c;
}

struct MwerConfig {
  int steps = 200;
  int batch_size = 8;
  double learning_rate = 0.001;
  double lambda_rnnt = 0.1;
  BandConfig band;
  // N-best generation; weights also enter the restricted lattice (alpha)
  // and the posterior (beta).
  DecodeConfig decode = MwerDecodeDefaults();
  uint64_t seed = 0;
};

struct MwerResult {
  std::vector<double> loss_curve;     // combined loss per batch
  std::vector<double> mwer_curve;     // expected word errors per batch
  int64_t empty_nbest = 0;            // utterances skipped for an empty list
  int64_t skipped_batches = 0;
};

MwerResult MwerFinetune(ToyFTModel *model, const FrozenLm &ilm,
                        const std::vector<PreparedUtterance> &train,
                        const Vocabulary &vocab, const MwerConfig &config);

}  // namespace ftilm

#endif  // FTILM_HARNESS_RECIPES_H_
