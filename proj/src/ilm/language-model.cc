// src/ilm/language-model.cc

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

#include "ftilm/ilm/language-model.h"

#include "ftilm/base/errors.h"

namespace ftilm {

UniformLm::UniformLm(int vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size < 1) throw InvalidInput("UniformLm: empty vocabulary");
}

LmState UniformLm::Advance(const LmState &state, int token) const {
  LmState next = state;
  next.push_back(token);
  return next;
}

std::vector<double> UniformLm::LogProbs(const LmState &) const {
  return std::vector<double>(vocab_size_, -std::log(vocab_size_));
}

double IlmLoss(const LmInterface &lm, const std::vector<TokenSequence> &corpus,
               int eos_id) {
  if (corpus.empty()) throw InvalidInput("IlmLoss: empty corpus");
  double nll = 0.0;
  int64_t count = 0;
  for (const auto &sentence : corpus) {
    if (sentence.empty() || sentence.back() != eos_id)
      throw InvalidInput("IlmLoss: every sentence must end with end-of-sentence");
    LmState state = lm.StartState();
    for (int token : sentence) {
      nll -= lm.LogProbs(state)[token];
      ++count;
      state = lm.Advance(state, token);
    }
  }
  return nll / static_cast<double>(count);
}

double SequenceLogProb(const LmInterface &lm, const TokenSequence &tokens) {
  double total = 0.0;
  LmState state = lm.StartState();
  for (int token : tokens) {
    total += lm.LogProbs(state)[token];
    state = lm.Advance(state, token);
  }
  return total;
}

}  // namespace ftilm
