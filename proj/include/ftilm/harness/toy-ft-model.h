// include/ftilm/harness/toy-ft-model.h


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

#ifndef FTILM_HARNESS_TOY_FT_MODEL_H_
#define FTILM_HARNESS_TOY_FT_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ftilm/base/checkpoint.h"
#include "ftilm/decode/beam-search.h"
#include "ftilm/factorization/factorized-scores.h"
#include "ftilm/harness/corpus.h"
#include "ftilm/ilm/language-model.h"

namespace ftilm {

struct FtModelConfig {
  int vocab_size = 0;
  int feature_dim = 8;
  int context = 2;          // frames on each side of the encoder window
  int hidden_dim = 32;
  int joint_dim = 16;
  int blank_embedding_dim = 8;
  double init_scale = 0.1;

  int WindowDim() const { return (2 * context + 1) * feature_dim; }
  void Check() const;
};

// Per-utterance encoder activations.
struct EncoderOutput {
  int num_frames = 0;
  std::vector<double> input;    // T x WindowDim
  std::vector<double> hidden;   // T x hidden_dim
  std::vector<double> am;       // T x V
  std::vector<double> proj;     // T x joint_dim, blank-joiner share of h_t
};

/*
  Factorized transducer at toy scale.

    x_t   = [f_{t-c}; ...; f_{t+c}]                  (zero outside [0, T))
    h_t   = tanh(W_1 x_t + b_1)
    am_t  = W_am h_t + b_am                          acoustic logits
    blank(t, k) = v . tanh(A h_t + L e_k + b_j) + c  k = last emitted token

  e_k is the stateless blank predictor's embedding of the previous label
  (<eos> before the first one).  The non-blank predictor is an external
  frozen LM and holds no parameters here.
*/
class ToyFTModel {
 public:
  ToyFTModel() = default;
  ToyFTModel(const FtModelConfig &config, uint64_t seed);

  static int64_t NumParams(const FtModelConfig &config);
  const FtModelConfig &Config() const { return config_; }
  std::span<double> Params() { return params_; }
  const std::vector<double> &ParamVector() const { return params_; }

  EncoderOutput Encode(const Utterance &utt) const;

  // L e_k + b_j for every token, V x joint_dim.
  std::vector<double> HistoryProjections() const;
  double BlankLogit(const EncoderOutput &enc, int t,
                    std::span<const double> history_proj) const;

  // Scores of every lattice cell for the target.  ilm_rows[u] holds the LM
  // log-probs after target[0..u) (see IlmRows).
  FTScores Scores(const EncoderOutput &enc, std::span<const int> target,
                  const std::vector<std::vector<double>> &ilm_rows) const;

  // Adds d loss / d params into *grad given d loss / d scores.  The ILM part
  // of d_scores is ignored (the LM is frozen).
  void Backward(const EncoderOutput &enc, std::span<const int> target,
                const FTScores &d_scores, std::vector<double> *grad) const;

  Checkpoint ToCheckpoint() const;
  static ToyFTModel FromCheckpoint(const Checkpoint &ckpt);

 private:
  struct Offsets {
    size_t w1, b1, w_am, b_am, a, emb, l, b_j, v, c, total;
  };
  static Offsets ComputeOffsets(const FtModelConfig &config);

  FtModelConfig config_;
  Offsets off_{};
  std::vector<double> params_;
};

// LM log-probs after each prefix of target: target.size() + 1 rows.
std::vector<std::vector<double>> IlmRows(const LmInterface &lm,
                                         std::span<const int> target);

// Decoder view of one encoded utterance.
class ModelScorer : public FrameScorer {
 public:
  ModelScorer(const ToyFTModel &model, const Utterance &utt);
  int NumFrames() const override { return enc_.num_frames; }
  int VocabSize() const override { return model_->Config().vocab_size; }
  std::span<const double> AmLogits(int t) const override;
  double BlankLogit(int t, const TokenSequence &history) const override;

 private:
  const ToyFTModel *model_;
  EncoderOutput enc_;
  std::vector<double> history_proj_;
};

}  // namespace ftilm

#endif  // FTILM_HARNESS_TOY_FT_MODEL_H_
