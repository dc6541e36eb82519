// tests/ilm-test.cc

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
#include "ftilm/ilm/language-model.h"
#include "ftilm/ilm/toy-neural-lm.h"
#include "test-util.h"

namespace ftilm {
namespace {

using testing::CentralDifference;
using testing::RelativeError;

// Markov source over {eos=0, a=1, b=2, c=3} in which every decision is a
// 0.8 / 0.2 choice:
//   start -> a | b,  a -> b | eos,  b -> a | c,  c -> a | eos
// so the per-token entropy is H(0.8) in every state.
std::vector<TokenSequence> BinaryChainCorpus(int num_sentences, uint64_t seed) {
  Rng rng(seed);
  const int next[4][2] = {{1, 2}, {2, 0}, {1, 3}, {1, 0}};  // row 0 = start
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < num_sentences; ++i) {
    TokenSequence s;
    int state = 0;
    do {
      int token = next[state][rng.Uniform() < 0.8 ? 0 : 1];
      s.push_back(token);
      state = token;
    } while (state != 0 && s.size() < 50);
    if (s.back() != 0) s.push_back(0);
    corpus.push_back(s);
  }
  return corpus;
}

ToyLmConfig SmallConfig(int V) {
  ToyLmConfig c;
  c.vocab_size = V;
  c.order = 3;
  c.embedding_dim = 4;
  c.hidden_dim = 5;
  return c;
}

TEST_CASE("uniform LM loss is log V") {
  UniformLm lm(8);
  std::vector<TokenSequence> corpus{{3, 1, 0}, {7, 7, 2, 5, 0}};
  double loss = IlmLoss(lm, corpus, 0);
  CHECK(loss == doctest::Approx(std::log(8.0)));
  CHECK(Perplexity(loss) == doctest::Approx(8.0));
}

TEST_CASE("ILM loss input errors") {
  UniformLm lm(4);
  CHECK_THROWS_AS(IlmLoss(lm, {}, 0), InvalidInput);
  CHECK_THROWS_AS(IlmLoss(lm, {{1, 2}}, 0), InvalidInput);
}

TEST_CASE("parameter count") {
  ToyLmConfig c;
  c.vocab_size = 31;
  c.order = 3;
  c.embedding_dim = 16;
  c.hidden_dim = 32;
  const int64_t V = 31, N = 3, E = 16, H = 32;
  CHECK(ToyNeuralLm::NumParams(c) == V * E + (N * E) * H + H + H * V + V);
  ToyNeuralLm lm(c, 1);
  CHECK(static_cast<int64_t>(lm.Params().size()) == ToyNeuralLm::NumParams(c));
}

TEST_CASE("log-probs are normalized and states are values") {
  ToyLmConfig c = SmallConfig(9);
  c.init_scale = 1.0;
  ToyNeuralLm lm(c, 2);
  Rng rng(3);
  LmState state = lm.StartState();
  for (int i = 0; i < 200; ++i) {
    std::vector<double> lp = lm.LogProbs(state);
    CHECK(std::abs(LogSumExp(lp)) <= 1e-9);
    CHECK(lm.LogProbs(state) == lp);
    LmState before = state;
    LmState next = lm.Advance(state, rng.UniformInt(9));
    CHECK(state == before);
    state = next;
  }
}

TEST_CASE("ILM gradient matches central differences") {
  ToyLmConfig c = SmallConfig(5);
  c.init_scale = 0.5;
  ToyNeuralLm lm(c, 4);
  std::vector<TokenSequence> corpus{{1, 2, 3, 0}, {4, 4, 1, 0}};
  std::vector<double> grad(lm.Params().size(), 0.0);
  int64_t tokens = 0;
  lm.NllAndGradient(corpus, &grad, &tokens);
  CHECK(tokens == 8);
  auto loss = [&]() { return IlmLoss(lm, corpus, 0); };
  double worst = 0.0;
  for (size_t i = 0; i < grad.size(); ++i) {
    double num = CentralDifference(&lm.Params()[i], loss);
    worst = std::max(worst, RelativeError(grad[i] / tokens, num));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("zero pretraining steps leave the model unchanged") {
  ToyNeuralLm lm(SmallConfig(4), 5);
  std::vector<double> before = lm.ParamVector();
  PretrainOptions opts;
  opts.steps = 0;
  auto curve = Pretrain(&lm, BinaryChainCorpus(10, 1), opts);
  CHECK(curve.empty());
  CHECK(lm.ParamVector() == before);
}

TEST_CASE("pretraining learns the binary chain") {
  const double entropy = -(0.8 * std::log(0.8) + 0.2 * std::log(0.2));
  auto corpus = BinaryChainCorpus(2000, 7);
  ToyLmConfig c = SmallConfig(4);
  c.embedding_dim = 8;
  c.hidden_dim = 16;
  ToyNeuralLm lm(c, 6);
  PretrainOptions opts;
  opts.steps = 1500;
  opts.batch_size = 32;
  opts.learning_rate = 0.3;
  opts.seed = 3;
  double initial = IlmLoss(lm, corpus, 0);
  Pretrain(&lm, corpus, opts);
  double final_loss = IlmLoss(lm, corpus, 0);
  MESSAGE("entropy " << entropy << " trained loss " << final_loss);
  CHECK(final_loss <= initial);
  CHECK(std::abs(final_loss - entropy) <= 0.05);
}

TEST_CASE("full-batch loss curve decreases smoothly") {
  auto corpus = BinaryChainCorpus(200, 8);
  ToyNeuralLm lm(SmallConfig(4), 9);
  PretrainOptions opts;
  opts.steps = 400;
  opts.batch_size = 0;
  opts.learning_rate = 0.1;
  auto curve = Pretrain(&lm, corpus, opts);
  REQUIRE(curve.size() == 400);
  double prev = 1e300;
  for (size_t i = 50; i <= curve.size(); ++i) {
    double avg = 0.0;
    for (size_t j = i - 50; j < i; ++j) avg += curve[j] / 50.0;
    CHECK(avg <= prev);
    prev = avg;
  }
}

TEST_CASE("pretraining is deterministic") {
  auto corpus = BinaryChainCorpus(100, 10);
  PretrainOptions opts;
  opts.steps = 50;
  opts.batch_size = 16;
  opts.seed = 11;
  ToyNeuralLm a(SmallConfig(4), 12), b(SmallConfig(4), 12);
  Pretrain(&a, corpus, opts);
  Pretrain(&b, corpus, opts);
  CHECK(a.ParamVector() == b.ParamVector());
}

TEST_CASE("divergence aborts with a diagnostic") {
  auto corpus = BinaryChainCorpus(20, 13);
  ToyNeuralLm lm(SmallConfig(4), 14);
  PretrainOptions opts;
  opts.steps = 200;
  opts.learning_rate = 1e200;
  CHECK_THROWS_AS(Pretrain(&lm, corpus, opts), TrainingDiverged);
}

TEST_CASE("freezing keeps scores and forbids training") {
  ToyNeuralLm lm(SmallConfig(6), 15);
  ToyNeuralLm copy = lm;
  FrozenLm frozen = Freeze(std::move(lm));
  Rng rng(16);
  LmState s = frozen.StartState();
  for (int i = 0; i < 20; ++i) {
    CHECK(frozen.LogProbs(s) == copy.LogProbs(s));
    s = frozen.Advance(s, rng.UniformInt(6));
  }
  CHECK(frozen.ParamHash() == HashParams(copy.ParamVector()));
  CHECK_THROWS_AS(frozen.Unfreeze(), UnsupportedOperation);
}

TEST_CASE("checkpoint round trip is bit exact") {
  ToyNeuralLm lm(SmallConfig(7), 17);
  std::stringstream buf;
  lm.ToCheckpoint().Write(buf);
  ToyNeuralLm back = ToyNeuralLm::FromCheckpoint(Checkpoint::Read(buf));
  CHECK(back.ParamVector() == lm.ParamVector());
  CHECK(back.Config().order == lm.Config().order);

  std::stringstream junk("not a checkpoint");
  CHECK_THROWS_AS(Checkpoint::Read(junk), IoError);
}

}  // namespace
}  // namespace ftilm
