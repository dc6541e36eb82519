// tests/training-test.cc


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

// Paired training runs on the default toy corpus (slow).

#include "doctest.h"

#include <cmath>

#include "ftilm/harness/pipeline.h"
#include "ftilm/harness/recipes.h"

namespace ftilm {
namespace {

TEST_CASE("banded and dense training reach similar greedy WER") {
  RunConfig cfg;
  cfg.Resolve();
  ToyCorpus corpus = GenerateCorpus(cfg.data);
  nlohmann::json report;
  FrozenLm ilm = Freeze(PretrainStage(cfg, corpus, &report));
  const uint64_t hash = ilm.ParamHash();

  RunConfig banded_cfg = cfg;
  banded_cfg.train.banded = true;
  banded_cfg.train.band = {15, 15};
  ToyFTModel dense = TrainStage(cfg, corpus, ilm, &report);
  ToyFTModel banded = TrainStage(banded_cfg, corpus, ilm, &report);
  CHECK(dense.ParamVector() != banded.ParamVector());
  CHECK(ilm.ParamHash() == hash);

  DecodeConfig greedy;
  greedy.beam_size = 1;
  const auto rare = RareWords(corpus);
  const double wer_dense =
      Evaluate(dense, ilm, corpus.dev, corpus.vocab, rare, greedy).stats.Wer();
  const double wer_banded =
      Evaluate(banded, ilm, corpus.dev, corpus.vocab, rare, greedy).stats.Wer();
  MESSAGE("greedy WER dense " << wer_dense << " banded " << wer_banded);
  CHECK(std::abs(wer_dense - wer_banded) <= 0.02);
}

}  // namespace
}  // namespace ftilm
