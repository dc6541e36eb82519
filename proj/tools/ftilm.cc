// tools/ftilm.cc


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

// Command-line front end: data generation, ILM pretraining, FT training,
// weight sweeps, decoding, MWER finetuning, evaluation and self-checks.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ftilm/base/errors.h"
#include "ftilm/base/checkpoint.h"
#include "ftilm/harness/checks.h"
#include "ftilm/harness/pipeline.h"

namespace {

using namespace ftilm;
using nlohmann::json;

void AddRunOptions(CLI::App *app, RunConfig *c) {
  app->add_option("--seed", c->seed, "Seed for every random stream");
  // data
  app->add_option("--num-common", c->data.num_common);
  app->add_option("--num-rare", c->data.num_rare);
  app->add_option("--feature-dim", c->data.feature_dim);
  app->add_option("--noise", c->data.noise);
  app->add_option("--rare-mix", c->data.rare_mix);
  app->add_option("--min-span", c->data.min_span);
  app->add_option("--max-span", c->data.max_span);
  app->add_option("--pause-prob", c->data.pause_prob);
  app->add_option("--max-words", c->data.max_words);
  app->add_option("--end-prob", c->data.end_prob);
  app->add_option("--trigger-prob", c->data.trigger_prob);
  app->add_option("--rare-keep", c->data.rare_keep);
  app->add_option("--rare-max-freq", c->data.rare_max_freq);
  app->add_option("--num-train", c->data.num_train);
  app->add_option("--num-dev", c->data.num_dev);
  app->add_option("--num-text", c->data.num_text);
  // ILM
  app->add_option("--ilm-order", c->ilm.order);
  app->add_option("--ilm-embedding-dim", c->ilm.embedding_dim);
  app->add_option("--ilm-hidden-dim", c->ilm.hidden_dim);
  app->add_option("--ilm-init-scale", c->ilm.init_scale);
  app->add_option("--ilm-steps", c->pretrain.steps);
  app->add_option("--ilm-learning-rate", c->pretrain.learning_rate);
  app->add_option("--ilm-momentum", c->pretrain.momentum);
  app->add_option("--ilm-batch-size", c->pretrain.batch_size);
  // FT model and training
  app->add_option("--context", c->model.context);
  app->add_option("--hidden-dim", c->model.hidden_dim);
  app->add_option("--joint-dim", c->model.joint_dim);
  app->add_option("--blank-embedding-dim", c->model.blank_embedding_dim);
  app->add_option("--init-scale", c->model.init_scale);
  app->add_option("--train-steps", c->train.steps);
  app->add_option("--train-batch-size", c->train.batch_size);
  app->add_option("--learning-rate", c->train.learning_rate);
  app->add_flag("--banded", c->train.banded, "Restrict training to the gold-alignment band");
  app->add_option("--band-left", c->train.band.left_context);
  app->add_option("--band-right", c->train.band.right_context);
  // decoding and sweep
  app->add_option("--beam-size", c->decode.beam_size);
  app->add_option("--alpha", c->decode.weights.alpha);
  app->add_option("--beta", c->decode.weights.beta);
  app->add_option("--length-norm", c->decode.length_norm);
  app->add_option("--max-symbols-per-frame", c->decode.max_symbols_per_frame);
  app->add_option("--sweep-alphas", c->sweep_alphas)->delimiter(',');
  app->add_option("--sweep-betas", c->sweep_betas)->delimiter(',');
  // MWER
  app->add_option("--mwer-steps", c->mwer.steps);
  app->add_option("--mwer-batch-size", c->mwer.batch_size);
  app->add_option("--mwer-learning-rate", c->mwer.learning_rate);
  app->add_option("--lambda-rnnt", c->mwer.lambda_rnnt);
  app->add_option("--mwer-band-left", c->mwer.band.left_context);
  app->add_option("--mwer-band-right", c->mwer.band.right_context);
  app->add_option("--mwer-beam-size", c->mwer.decode.beam_size);
}

void Emit(const json &report, const std::string &out) {
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream os(out);
  if (!os) throw IoError("cannot write " + out);
  os << report.dump(2) << '\n';
}

json Check(const std::string &name, bool passed, double value, double limit) {
  return {{"name", name}, {"passed", passed}, {"value", value}, {"limit", limit}};
}

bool ChecksPass(const json &checks) {
  for (const auto &c : checks)
    if (!c["passed"].get<bool>()) return false;
  return true;
}

FrozenLm LoadIlm(const std::string &path) {
  return Freeze(ToyNeuralLm::FromCheckpoint(Checkpoint::ReadFile(path)));
}

ToyFTModel LoadModel(const std::string &path) {
  return ToyFTModel::FromCheckpoint(Checkpoint::ReadFile(path));
}

const std::vector<Utterance> &Split(const ToyCorpus &corpus,
                                    const std::string &name) {
  if (name == "train") return corpus.train;
  if (name == "dev") return corpus.dev;
  throw ConfigError("unknown split '" + name + "' (expected train or dev)");
}

// Tuned weights from a sweep report, or the configured decode weights.
FusionWeights TunedWeights(const std::string &sweep_report,
                           const RunConfig &cfg) {
  if (sweep_report.empty()) return cfg.decode.weights;
  std::ifstream is(sweep_report);
  if (!is) throw IoError("cannot read " + sweep_report);
  json r;
  try {
    r = json::parse(is);
    const json &argmin = r.contains("sweep") ? r["sweep"]["argmin"] : r["argmin"];
    return {argmin["alpha"].get<double>(), argmin["beta"].get<double>()};
  } catch (const json::exception &e) {
    throw IoError(sweep_report + ": not a sweep report: " + e.what());
  }
}

void WriteNBest(const std::vector<Utterance> &utts,
                const std::vector<std::vector<Hypothesis>> &nbest,
                const Vocabulary &vocab, std::ostream &os) {
  for (size_t i = 0; i < utts.size(); ++i) {
    json hyps = json::array();
    for (const Hypothesis &h : nbest[i])
      hyps.push_back({{"tokens", h.tokens},
                      {"words", vocab.Decode(h.tokens)},
                      {"score", h.score},
                      {"viterbi_alignment", h.viterbi_alignment},
                      {"ilm_logprob_sum", h.ilm_logprob_sum}});
    os << json{{"id", utts[i].id}, {"hypotheses", hyps}}.dump() << '\n';
  }
}

// Files shared by the stage commands.
struct Paths {
  std::string data = "work/data";
  std::string ilm = "work/ilm.ckpt";
  std::string model = "work/model.ckpt";
  std::string out;       // checkpoint or N-best output
  std::string report;    // report file (default stdout)
  std::string sweep;     // sweep report supplying tuned weights
  std::string split = "dev";
  double max_wer = -1.0;
  double max_rare_wer = -1.0;
  bool check = false;
};

CLI::App *Stage(CLI::App *app, const std::string &name, const std::string &help,
                Paths *p, bool data, bool ilm, bool model) {
  CLI::App *sub = app->add_subcommand(name, help);
  sub->fallthrough();
  if (data) sub->add_option("--data", p->data, "Corpus directory");
  if (ilm) sub->add_option("--ilm", p->ilm, "ILM checkpoint");
  if (model) sub->add_option("--model", p->model, "FT model checkpoint");
  sub->add_option("--report", p->report, "Report file (default stdout)");
  return sub;
}

int Run(CLI::App &app, RunConfig cfg, const Paths &p) {
  cfg.Resolve();
  json report{{"command", app.get_subcommands().front()->get_name()},
              {"seed", cfg.seed}};
  json checks = json::array();
  const std::string cmd = report["command"];

  if (cmd == "gen-data") {
    ToyCorpus corpus = GenerateCorpus(cfg.data);
    SaveCorpus(corpus, p.out.empty() ? p.data : p.out);
    report["corpus"] = CorpusSummary(corpus);
  } else if (cmd == "pretrain-ilm") {
    ToyCorpus corpus = LoadCorpus(p.data);
    json stage;
    ToyNeuralLm lm = PretrainStage(cfg, corpus, &stage);
    lm.ToCheckpoint().WriteFile(p.out.empty() ? p.ilm : p.out);
    report["ilm"] = stage;
  } else if (cmd == "train") {
    ToyCorpus corpus = LoadCorpus(p.data);
    FrozenLm ilm = LoadIlm(p.ilm);
    const uint64_t hash = ilm.ParamHash();
    json stage;
    ToyFTModel model = TrainStage(cfg, corpus, ilm, &stage);
    model.ToCheckpoint().WriteFile(p.out.empty() ? p.model : p.out);
    report["train"] = stage;
    report["ilm_unchanged"] = ilm.ParamHash() == hash;
  } else if (cmd == "sweep") {
    ToyCorpus corpus = LoadCorpus(p.data);
    FrozenLm ilm = LoadIlm(p.ilm);
    ToyFTModel model = LoadModel(p.model);
    SweepResult sweep = Sweep(model, ilm, Split(corpus, p.split), corpus.vocab,
                              RareWords(corpus), cfg.sweep_alphas,
                              cfg.sweep_betas, cfg.decode);
    report["sweep"] = ToJson(sweep);
  } else if (cmd == "decode") {
    ToyCorpus corpus = LoadCorpus(p.data);
    FrozenLm ilm = LoadIlm(p.ilm);
    ToyFTModel model = LoadModel(p.model);
    const auto &utts = Split(corpus, p.split);
    auto nbest = DecodeUtterances(model, ilm, utts, cfg.decode);
    const std::string out = p.out.empty() ? "work/nbest.jsonl" : p.out;
    std::ofstream os(out);
    if (!os) throw IoError("cannot write " + out);
    WriteNBest(utts, nbest, corpus.vocab, os);
    report["nbest"] = {{"file", out}, {"utterances", utts.size()}};
  } else if (cmd == "mwer-finetune") {
    ToyCorpus corpus = LoadCorpus(p.data);
    FrozenLm ilm = LoadIlm(p.ilm);
    ToyFTModel model = LoadModel(p.model);
    const uint64_t hash = ilm.ParamHash();
    report["mwer"] = MwerStage(cfg, corpus, ilm, TunedWeights(p.sweep, cfg), &model);
    model.ToCheckpoint().WriteFile(p.out.empty() ? "work/mwer-model.ckpt" : p.out);
    report["ilm_unchanged"] = ilm.ParamHash() == hash;
    if (p.check) {
      const json &b = report["mwer"]["before"], &a = report["mwer"]["after"];
      checks.push_back(Check("mwer-wer-not-increased", a["wer"] <= b["wer"],
                             a["wer"], b["wer"]));
      checks.push_back(Check("mwer-rare-wer-reduced",
                             a["rare_wer"] < b["rare_wer"], a["rare_wer"],
                             b["rare_wer"]));
    }
  } else if (cmd == "evaluate") {
    ToyCorpus corpus = LoadCorpus(p.data);
    FrozenLm ilm = LoadIlm(p.ilm);
    ToyFTModel model = LoadModel(p.model);
    DecodeConfig decode = cfg.decode;
    decode.weights = TunedWeights(p.sweep, cfg);
    WordErrorStats stats = Evaluate(model, ilm, Split(corpus, p.split), corpus.vocab,
                                    RareWords(corpus), decode).stats;
    report["weights"] = {{"alpha", decode.weights.alpha}, {"beta", decode.weights.beta}};
    report["metrics"] = ToJson(stats);
    if (p.max_wer >= 0)
      checks.push_back(Check("max-wer", stats.Wer() <= p.max_wer, stats.Wer(), p.max_wer));
    if (p.max_rare_wer >= 0)
      checks.push_back(Check("max-rare-wer", stats.RareWer() <= p.max_rare_wer,
                             stats.RareWer(), p.max_rare_wer));
  } else if (cmd == "gradcheck") {
    checks = ToJson(GradientChecks(cfg.seed));
  } else if (cmd == "oracle-check") {
    checks = ToJson(OracleChecks(cfg.seed));
  } else if (cmd == "pipeline") {
    report = RunPipeline(cfg);
    report["command"] = cmd;
    if (p.check) {
      const json &base = report["baseline"];
      const json &sweep = report["sweep"]["cells"];
      json best;
      for (const auto &c : sweep)
        if (c["argmin"].get<bool>()) best = c;
      const double rare_gain =
          base["rare_wer"].get<double>() > 0
              ? 1.0 - best["rare_wer"].get<double>() / base["rare_wer"].get<double>()
              : 0.0;
      checks.push_back(Check("sweep-wer-improved", best["wer"] < base["wer"],
                             best["wer"], base["wer"]));
      checks.push_back(Check("sweep-rare-wer-relative-gain", rare_gain >= 0.1,
                             rare_gain, 0.1));
      const json &b = report["mwer"]["before"], &a = report["mwer"]["after"];
      checks.push_back(Check("mwer-wer-not-increased", a["wer"] <= b["wer"],
                             a["wer"], b["wer"]));
      checks.push_back(Check("mwer-rare-wer-reduced",
                             a["rare_wer"] < b["rare_wer"], a["rare_wer"],
                             b["rare_wer"]));
      checks.push_back(Check("ilm-unchanged", report["ilm_unchanged"].get<bool>(),
                             0, 0));
    }
  }
  if (!checks.empty()) {
    report["checks"] = checks;
    report["passed"] = ChecksPass(checks);
  }
  Emit(report, p.report);
  return ChecksPass(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Factorized transducer with internal LM fusion (toy scale)"};
  app.set_config("--config", "", "Key = value configuration file");
  app.require_subcommand(1);
  RunConfig config;
  AddRunOptions(&app, &config);
  Paths p;

  Stage(&app, "gen-data", "Generate the toy corpus into --data", &p, true, false, false);
  Stage(&app, "pretrain-ilm", "Pretrain the ILM on the text corpus", &p, true, false, false)
      ->add_option("--out", p.out, "ILM checkpoint (default --ilm)");
  Stage(&app, "train", "Train the FT model against the frozen ILM", &p, true, true, false)
      ->add_option("--out", p.out, "Model checkpoint (default --model)");
  Stage(&app, "sweep", "Sweep the fusion weights", &p, true, true, true)
      ->add_option("--split", p.split, "train or dev");
  auto *decode = Stage(&app, "decode", "Write N-best lists as JSONL", &p, true, true, true);
  decode->add_option("--split", p.split, "train or dev");
  decode->add_option("--out", p.out, "N-best file (default work/nbest.jsonl)");
  auto *mwer = Stage(&app, "mwer-finetune", "MWER finetuning with tuned weights", &p,
                     true, true, true);
  mwer->add_option("--out", p.out, "Model checkpoint (default work/mwer-model.ckpt)");
  mwer->add_option("--sweep-report", p.sweep, "Take the weights from this sweep's argmin");
  mwer->add_flag("--check", p.check,
                 "Fail unless dev WER does not rise and rare-word WER falls");
  auto *eval = Stage(&app, "evaluate", "Score top-1 hypotheses", &p, true, true, true);
  eval->add_option("--split", p.split, "train or dev");
  eval->add_option("--sweep-report", p.sweep, "Take the weights from this sweep's argmin");
  eval->add_option("--max-wer", p.max_wer, "Fail if WER exceeds this fraction");
  eval->add_option("--max-rare-wer", p.max_rare_wer,
                   "Fail if rare-word WER exceeds this fraction");
  Stage(&app, "gradcheck", "Finite-difference gradient checks", &p, false, false, false);
  Stage(&app, "oracle-check", "Brute-force and property checks", &p, false, false, false);
  Stage(&app, "pipeline", "Run every stage end to end", &p, false, false, false)
      ->add_flag("--check", p.check,
                 "Fail unless the tuned and MWER results improve on their baselines");

  CLI11_PARSE(app, argc, argv);
  try {
    return Run(app, config, p);
  } catch (const ftilm::Error &e) {
    std::cerr << "ftilm: " << e.what() << '\n';
    return 2;
  }
}
