// Copyright (c) 2026 patcorrect-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATC_TRAIN_HPP
#define PATC_TRAIN_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "patc/align.hpp"
#include "patc/model.hpp"
#include "patc/textphon.hpp"

namespace patc::train {

struct TrainConfig {
  double lr_peak = 5e-4;
  long warmup_steps = 400;
  long max_batch_tokens = 1024;
  double label_smoothing = 0.1;
  double tag_loss_weight = 1.0;
  long epochs = 10;
  uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;

  void validate() const;
};

struct TrainingExample {
  textphon::TokenSeq source;      // w
  textphon::PhonemeSeq phonemes;  // p
  textphon::TokenSeq target;      // w_hat
  align::TagSeq tags;             // t, precomputed
  std::vector<int> adjusted_ids;  // w'_t, the decoder input
};

struct Dataset {
  std::vector<TrainingExample> examples;
  int skipped_lines = 0;
  int dropped_empty_target = 0;
  int clamped_tags = 0;
};

// Word/phoneme vocabularies harvested from a TSV corpus in line order, so
// vocabulary construction is deterministic.
std::pair<textphon::Vocab, textphon::Vocab> build_vocabs(
    const std::string& corpus_path, const textphon::PronDict& dict);

// Corpus lines are "source \t target". Malformed lines are skipped with a
// count; more than half skipped is a hard error.
Dataset build_dataset(const std::string& corpus_path,
                      const textphon::PronDict& dict,
                      const textphon::Vocab& word_vocab,
                      const textphon::Vocab& phoneme_vocab,
                      int max_tag_magnitude = 4);

struct LossParts {
  double total = 0.0;
  double token_ce = 0.0;
  double tag_mse = 0.0;
};

// Teacher-forced loss graph for one example:
//   CE_labelsmoothed(decode(w'_t), w_hat) + lambda * MSE(TagP output, t)
// The scalar tensor is returned so callers control backward().
Tensor loss_graph(model::ForwardCtx& ctx, const TrainingExample& ex,
                  const TrainConfig& tcfg, LossParts* parts = nullptr);

// Inverse square root schedule with linear warmup; step counts from 1.
double lr_at(const TrainConfig& cfg, long step);

class AdamOptimizer {
 public:
  AdamOptimizer(const TrainConfig& cfg, model::ModelParams& params);
  // grads maps parameter name -> averaged gradient buffer.
  void step(const std::map<std::string, std::vector<double>>& grads);
  long steps_done() const { return step_; }
  void set_steps_done(long s) { step_ = s; }

 private:
  const TrainConfig cfg_;
  model::ModelParams& params_;
  std::map<std::string, std::vector<double>> m_, v_;
  long step_ = 0;
};

struct EpochRecord {
  long epoch = 0;
  long steps = 0;  // cumulative optimizer steps
  double mean_loss = 0.0;
  double mean_token_ce = 0.0;
  double mean_tag_mse = 0.0;
  std::optional<double> dev_wer;
};

struct TrainOptions {
  std::string out_dir;  // checkpoints per epoch + best-dev; empty = none
  const Dataset* dev = nullptr;
  std::optional<double> stop_at_dev_wer;  // early stop threshold
  long max_steps = 0;                     // 0 = epochs limit only
  long initial_steps = 0;                 // resume continues the counter
  long eval_every_steps = 0;              // 0 = once per epoch
  std::function<void(const EpochRecord&)> on_epoch;
  uint64_t word_vocab_hash = 0;
  uint64_t phoneme_vocab_hash = 0;
  const textphon::Vocab* word_vocab = nullptr;  // needed for dev WER
  const textphon::PronDict* dict = nullptr;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  long steps = 0;
  std::optional<double> best_dev_wer;
  bool reached_target = false;
};

// Adam + inverse-square-root schedule over greedily token-packed batches.
// Aborts (after checkpointing when possible) if the loss diverges.
TrainResult train_loop(const Dataset& dataset, const model::ModelConfig& mcfg,
                       const TrainConfig& tcfg, model::ModelParams& params,
                       const TrainOptions& options = {});

// Corpus WER of greedy corrections against the dataset targets.
double dataset_wer(const Dataset& dataset, const model::ModelConfig& mcfg,
                   const model::ModelParams& params,
                   const textphon::Vocab& word_vocab);

}  // namespace patc::train

#endif  // PATC_TRAIN_HPP
