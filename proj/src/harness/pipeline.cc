// src/harness/pipeline.cc


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

#include "ftilm/harness/pipeline.h"

#include "ftilm/base/errors.h"

namespace ftilm {

using nlohmann::json;

void RunConfig::Resolve() {
  data.seed = seed;
  pretrain.seed = seed;
  train.seed = seed;
  mwer.seed = seed;
  if (sweep_alphas.empty() || sweep_betas.empty())
    throw ConfigError("RunConfig: sweep grids must be non-empty");
  data.Check();
  decode.Check();
  mwer.decode.Check();
}

std::set<std::string> RareWords(const ToyCorpus &corpus) {
  std::set<std::string> rare;
  for (int id : corpus.rare_ids) rare.insert(corpus.vocab.Word(id));
  return rare;
}

json ToJson(const WordErrorStats &s) {
  return {{"wer", s.Wer()},
          {"rare_wer", s.RareWer()},
          {"ref_words", s.ref_words},
          {"substitutions", s.substitutions},
          {"deletions", s.deletions},
          {"insertions", s.insertions},
          {"rare_ref_words", s.rare_ref_words},
          {"rare_errors", s.rare_errors}};
}

json ToJson(const SweepResult &sweep) {
  json cells = json::array();
  for (size_t i = 0; i < sweep.cells.size(); ++i) {
    const SweepCell &c = sweep.cells[i];
    cells.push_back({{"alpha", c.alpha},
                     {"beta", c.beta},
                     {"wer", c.stats.Wer()},
                     {"rare_wer", c.stats.RareWer()},
                     {"argmin", i == sweep.best}});
  }
  const SweepCell &best = sweep.cells[sweep.best];
  return {{"cells", cells},
          {"argmin", {{"alpha", best.alpha}, {"beta", best.beta}}}};
}

std::vector<TokenSequence> DevText(const ToyCorpus &corpus) {
  std::vector<TokenSequence> text;
  for (const auto &u : corpus.dev) {
    text.push_back(corpus.vocab.Encode(u.words));
    text.back().push_back(Vocabulary::kEos);
  }
  return text;
}

ToyNeuralLm PretrainStage(const RunConfig &cfg, const ToyCorpus &corpus,
                          json *report) {
  ToyLmConfig lm_cfg = cfg.ilm;
  lm_cfg.vocab_size = corpus.vocab.Size();
  lm_cfg.eos_id = Vocabulary::kEos;
  ToyNeuralLm lm(lm_cfg, cfg.seed);
  std::vector<double> curve = Pretrain(&lm, corpus.TextTokens(), cfg.pretrain);
  const double dev_loss = IlmLoss(lm, DevText(corpus), Vocabulary::kEos);
  *report = {{"steps", curve.size()},
             {"final_batch_loss", curve.empty() ? 0.0 : curve.back()},
             {"dev_perplexity", Perplexity(dev_loss)},
             {"param_hash", HashParams(lm.ParamVector())}};
  return lm;
}

ToyFTModel TrainStage(const RunConfig &cfg, const ToyCorpus &corpus,
                      const FrozenLm &ilm, json *report) {
  FtModelConfig model_cfg = cfg.model;
  model_cfg.vocab_size = corpus.vocab.Size();
  model_cfg.feature_dim = corpus.train.empty() ? cfg.data.feature_dim
                                               : corpus.train[0].feature_dim;
  ToyFTModel model(model_cfg, cfg.seed);
  std::vector<PreparedUtterance> train = Prepare(corpus.train, corpus.vocab, ilm);
  TrainResult tr = TrainFt(&model, ilm, train, cfg.train);
  *report = {{"steps", tr.loss_curve.size()},
             {"initial_loss", tr.loss_curve.empty() ? 0.0 : tr.loss_curve.front()},
             {"final_loss", tr.loss_curve.empty() ? 0.0 : tr.loss_curve.back()}};
  return model;
}

json MwerStage(const RunConfig &cfg, const ToyCorpus &corpus,
               const FrozenLm &ilm, const FusionWeights &tuned,
               ToyFTModel *model) {
  const std::set<std::string> rare = RareWords(corpus);
  MwerConfig mwer_cfg = cfg.mwer;
  mwer_cfg.decode.weights = tuned;
  // Scored with the tuned decode setup; the N-best inside the loss stays
  // unnormalized.
  DecodeConfig tuned_decode = cfg.decode;
  tuned_decode.weights = tuned;
  WordErrorStats before =
      Evaluate(*model, ilm, corpus.dev, corpus.vocab, rare, tuned_decode).stats;
  std::vector<PreparedUtterance> train = Prepare(corpus.train, corpus.vocab, ilm);
  MwerResult mr = MwerFinetune(model, ilm, train, corpus.vocab, mwer_cfg);
  WordErrorStats after =
      Evaluate(*model, ilm, corpus.dev, corpus.vocab, rare, tuned_decode).stats;
  return {{"alpha", tuned.alpha},
          {"beta", tuned.beta},
          {"steps", mr.loss_curve.size()},
          {"initial_loss", mr.loss_curve.empty() ? 0.0 : mr.loss_curve.front()},
          {"final_loss", mr.loss_curve.empty() ? 0.0 : mr.loss_curve.back()},
          {"empty_nbest", mr.empty_nbest},
          {"skipped_batches", mr.skipped_batches},
          {"before", ToJson(before)},
          {"after", ToJson(after)}};
}

json CorpusSummary(const ToyCorpus &corpus) {
  return {{"train", corpus.train.size()},
          {"dev", corpus.dev.size()},
          {"text", corpus.text.size()},
          {"vocab_size", corpus.vocab.Size()},
          {"rare_train_frequency", RareTrainFrequency(corpus)}};
}

json RunPipeline(const RunConfig &input, PipelineArtifacts *artifacts) {
  RunConfig cfg = input;
  cfg.Resolve();
  json report;
  report["seed"] = cfg.seed;

  ToyCorpus corpus = GenerateCorpus(cfg.data);
  const std::set<std::string> rare = RareWords(corpus);
  report["corpus"] = CorpusSummary(corpus);

  json stage;
  FrozenLm ilm = Freeze(PretrainStage(cfg, corpus, &stage));
  report["ilm"] = stage;
  const uint64_t ilm_hash = ilm.ParamHash();

  ToyFTModel model = TrainStage(cfg, corpus, ilm, &stage);
  report["train"] = stage;

  DecodeConfig baseline = cfg.decode;
  baseline.weights = FusionWeights::Training();
  report["baseline"] = ToJson(
      Evaluate(model, ilm, corpus.dev, corpus.vocab, rare, baseline).stats);

  SweepResult sweep = Sweep(model, ilm, corpus.dev, corpus.vocab, rare,
                            cfg.sweep_alphas, cfg.sweep_betas, cfg.decode);
  report["sweep"] = ToJson(sweep);
  const SweepCell &best = sweep.cells[sweep.best];
  const FusionWeights tuned{best.alpha, best.beta};

  ToyFTModel finetuned = model;
  report["mwer"] = MwerStage(cfg, corpus, ilm, tuned, &finetuned);
  report["ilm_unchanged"] = ilm.ParamHash() == ilm_hash;

  if (artifacts != nullptr) {
    artifacts->corpus = std::move(corpus);
    artifacts->ilm = std::make_shared<const ToyNeuralLm>(ilm.Model());
    artifacts->model = std::move(model);
    artifacts->mwer_model = std::move(finetuned);
    artifacts->sweep = std::move(sweep);
    artifacts->tuned = tuned;
  }
  return report;
}

}  // namespace ftilm
