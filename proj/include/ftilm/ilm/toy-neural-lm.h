// include/ftilm/ilm/toy-neural-lm.h

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

#ifndef FTILM_ILM_TOY_NEURAL_LM_H_
#define FTILM_ILM_TOY_NEURAL_LM_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ftilm/base/checkpoint.h"
#include "ftilm/ilm/language-model.h"

namespace ftilm {

struct ToyLmConfig {
  int vocab_size = 0;
  int order = 3;           // number of previous tokens in the context
  int embedding_dim = 16;
  int hidden_dim = 32;
  int eos_id = 0;          // also pads the context at sentence start
  double init_scale = 0.1;

  void Check() const;
};

/*
  Fixed-order feed-forward LM:

    x      = [emb(c_1); ...; emb(c_N)]          N*E
    h      = tanh(W_h x + b_h)                  H
    logits = W_o h + b_o                        V

  All parameters live in one flat vector in the order
  emb (V x E), W_h (H x N*E), b_h (H), W_o (V x H), b_o (V).
*/
class ToyNeuralLm : public LmInterface {
 public:
  ToyNeuralLm() = default;
  // Parameters are drawn from N(0, init_scale^2) (biases zero).
  ToyNeuralLm(const ToyLmConfig &config, uint64_t seed);

  static int64_t NumParams(const ToyLmConfig &config);

  const ToyLmConfig &Config() const { return config_; }
  std::span<double> Params() { return params_; }
  std::span<const double> Params() const { return params_; }
  const std::vector<double> &ParamVector() const { return params_; }

  int VocabSize() const override { return config_.vocab_size; }
  LmState StartState() const override;
  LmState Advance(const LmState &state, int token) const override;
  std::vector<double> LogProbs(const LmState &state) const override;

  // Summed (not averaged) NLL of the sentences and, if grad is non-NULL, its
  // gradient added into *grad (which must have NumParams() entries).
  // Returns the number of tokens through *num_tokens.
  double NllAndGradient(std::span<const TokenSequence> sentences,
                        std::vector<double> *grad, int64_t *num_tokens) const;

  Checkpoint ToCheckpoint() const;
  static ToyNeuralLm FromCheckpoint(const Checkpoint &ckpt);

 private:
  struct Offsets {
    size_t emb, w_hidden, b_hidden, w_out, b_out, total;
  };
  static Offsets ComputeOffsets(const ToyLmConfig &config);

  // Hidden activation and unnormalized output for a context.
  void Forward(const LmState &context, std::vector<double> *input,
               std::vector<double> *hidden, std::vector<double> *logits) const;

  ToyLmConfig config_;
  Offsets offsets_{};
  std::vector<double> params_;
};

struct PretrainOptions {
  int steps = 1000;
  double learning_rate = 0.5;
  double momentum = 0.9;   // 0 for plain SGD
  int batch_size = 32;     // sentences per step; 0 means the whole corpus
  uint64_t seed = 0;       // minibatch sampling
};

// Minimizes the mean per-token NLL with SGD.  Returns the loss of each step
// (measured on that step's batch before the update).  Throws
// TrainingDiverged if the loss becomes non-finite.  The gradient is
// accumulated over fixed chunks of the batch in parallel and reduced in
// chunk order, so results do not depend on the thread count.
std::vector<double> Pretrain(ToyNeuralLm *lm,
                             const std::vector<TokenSequence> &corpus,
                             const PretrainOptions &opts);

// Read-only handle on a trained LM.  Holders can score but not train;
// there is no way back to a mutable model.
class FrozenLm : public LmInterface {
 public:
  FrozenLm() = default;
  explicit FrozenLm(std::shared_ptr<const ToyNeuralLm> lm) : lm_(std::move(lm)) {}

  int VocabSize() const override { return lm_->VocabSize(); }
  LmState StartState() const override { return lm_->StartState(); }
  LmState Advance(const LmState &state, int token) const override {
    return lm_->Advance(state, token);
  }
  std::vector<double> LogProbs(const LmState &state) const override {
    return lm_->LogProbs(state);
  }

  const ToyNeuralLm &Model() const { return *lm_; }
  uint64_t ParamHash() const { return HashParams(lm_->ParamVector()); }

  // Always throws UnsupportedOperation.
  [[noreturn]] ToyNeuralLm Unfreeze() const;

 private:
  std::shared_ptr<const ToyNeuralLm> lm_;
};

FrozenLm Freeze(ToyNeuralLm lm);

}  // namespace ftilm

#endif  // FTILM_ILM_TOY_NEURAL_LM_H_
