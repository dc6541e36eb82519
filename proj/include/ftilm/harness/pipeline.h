// include/ftilm/harness/pipeline.h


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

#ifndef FTILM_HARNESS_PIPELINE_H_
#define FTILM_HARNESS_PIPELINE_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ftilm/harness/corpus.h"
#include "ftilm/harness/recipes.h"
#include "ftilm/harness/toy-ft-model.h"
#include "ftilm/ilm/toy-neural-lm.h"

namespace ftilm {

// Everything a run needs.  One seed feeds every random stream (data, model
// initialization, batching) through named sub-streams.
struct RunConfig {
  uint64_t seed = 0;
  DataConfig data;
  ToyLmConfig ilm;            // vocab_size comes from the corpus
  PretrainOptions pretrain;
  FtModelConfig model;        // vocab_size and feature_dim come from the corpus
  TrainConfig train;
  DecodeConfig decode;        // baseline decode; the sweep varies the weights
  std::vector<double> sweep_alphas{0.0, 0.3, 0.6, 1.0, 1.3};
  std::vector<double> sweep_betas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  MwerConfig mwer;            // decode weights are set from the sweep argmin

  // Copies seed into the sub-configs and checks grids.
  void Resolve();
};

std::set<std::string> RareWords(const ToyCorpus &corpus);

nlohmann::json ToJson(const WordErrorStats &stats);
nlohmann::json ToJson(const SweepResult &sweep);

// Pipeline stages, shared with the command-line tool.  `cfg` must be
// resolved.  Each fills *report with its summary.
nlohmann::json CorpusSummary(const ToyCorpus &corpus);
std::vector<TokenSequence> DevText(const ToyCorpus &corpus);
ToyNeuralLm PretrainStage(const RunConfig &cfg, const ToyCorpus &corpus,
                          nlohmann::json *report);
ToyFTModel TrainStage(const RunConfig &cfg, const ToyCorpus &corpus,
                      const FrozenLm &ilm, nlohmann::json *report);
// MWER finetuning of *model with the tuned weights; the report holds dev
// metrics before and after under the tuned decode setup.
nlohmann::json MwerStage(const RunConfig &cfg, const ToyCorpus &corpus,
                         const FrozenLm &ilm, const FusionWeights &tuned,
                         ToyFTModel *model);

// Intermediate products of RunPipeline, for callers that want to inspect or
// save them.
struct PipelineArtifacts {
  ToyCorpus corpus;
  std::shared_ptr<const ToyNeuralLm> ilm;
  ToyFTModel model;            // after cross-entropy training
  ToyFTModel mwer_model;       // after MWER finetuning
  SweepResult sweep;
  FusionWeights tuned;
};

/*
  gen-data -> pretrain ILM on text -> freeze -> FT training -> baseline
  decode (alpha = 1, beta = 0) -> alpha/beta sweep on dev -> MWER finetune
  with the tuned weights.  Returns the metric report.
*/
nlohmann::json RunPipeline(const RunConfig &config,
                           PipelineArtifacts *artifacts = nullptr);

}  // namespace ftilm

#endif  // FTILM_HARNESS_PIPELINE_H_
