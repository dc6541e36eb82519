// include/ftilm/ilm/language-model.h

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

#ifndef FTILM_ILM_LANGUAGE_MODEL_H_
#define FTILM_ILM_LANGUAGE_MODEL_H_

#include <cmath>
#include <memory>
#include <vector>

namespace ftilm {

// Label history as seen by a language model.  States are values: Advance
// returns a new one and never modifies its argument.
using LmState = std::vector<int>;

using TokenSequence = std::vector<int>;

// Scoring interface of the non-blank predictor (and of any external LM).
// LogProbs(state) is a normalized log-distribution over the vocabulary.
class LmInterface {
 public:
  virtual ~LmInterface() = default;

  virtual int VocabSize() const = 0;
  virtual LmState StartState() const = 0;
  virtual LmState Advance(const LmState &state, int token) const = 0;
  virtual std::vector<double> LogProbs(const LmState &state) const = 0;
};

class UniformLm : public LmInterface {
 public:
  explicit UniformLm(int vocab_size);

  int VocabSize() const override { return vocab_size_; }
  LmState StartState() const override { return {}; }
  LmState Advance(const LmState &state, int token) const override;
  std::vector<double> LogProbs(const LmState &state) const override;

 private:
  int vocab_size_;
};

// Mean negative log-likelihood per token, -1/N sum log P(token | history),
// where every sentence is scored from StartState().  Sentences must be
// non-empty and end with eos_id.  Throws InvalidInput on an empty corpus.
double IlmLoss(const LmInterface &lm,
               const std::vector<TokenSequence> &corpus, int eos_id);

inline double Perplexity(double ilm_loss) { return std::exp(ilm_loss); }

// Sum of log P_ilm over the tokens of one hypothesis (no end-of-sentence).
double SequenceLogProb(const LmInterface &lm, const TokenSequence &tokens);

}  // namespace ftilm

#endif  // FTILM_ILM_LANGUAGE_MODEL_H_
