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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "patc/model.hpp"
#include "patc/textphon.hpp"
#include "patc/train.hpp"

using namespace patc::train;
using patc::Graph;
using patc::Tensor;

namespace {

const std::string kDictPath = std::string(PATC_DATA_DIR) + "/cmudict_small.txt";

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(name) {
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

patc::model::ModelConfig small_config() {
  patc::model::ModelConfig cfg;
  cfg.d_h = 16;
  cfg.n_layers_text = 1;
  cfg.n_layers_phon = 1;
  cfg.n_layers_dec = 1;
  cfg.n_heads = 2;
  cfg.d_mlp = 32;
  cfg.n_conv_tagp = 2;
  cfg.dropout = 0.0;
  return cfg;
}

// Mirrors the trainer's per-example gradient extraction for a fixed example.
std::map<std::string, std::vector<double>> grads_of(
    Graph& g, const patc::model::ModelParams& params) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, t] : params.t) {
    const auto& gr = g.grad_of(t);
    if (!gr.empty()) out[name] = gr;
  }
  return out;
}

}  // namespace

TEST_CASE("lr schedule: warmup ramp, junction, inverse square root decay") {
  TrainConfig cfg;
  cfg.lr_peak = 5e-4;
  cfg.warmup_steps = 400;

  // Monotone increase before the junction.
  for (long s = 2; s <= 400; ++s) {
    CHECK(lr_at(cfg, s) > lr_at(cfg, s - 1));
  }
  // Peak exactly at the junction.
  CHECK(lr_at(cfg, 400) == doctest::Approx(cfg.lr_peak).epsilon(1e-15));
  // Inverse square root after it.
  for (long s : {500L, 1000L, 4000L}) {
    CHECK(lr_at(cfg, s) ==
          doctest::Approx(cfg.lr_peak * std::sqrt(400.0 / s)).epsilon(1e-12));
  }
  CHECK(lr_at(cfg, 1600) == doctest::Approx(lr_at(cfg, 400) / 2).epsilon(1e-12));
  CHECK_THROWS(lr_at(cfg, 0));
}

TEST_CASE("build_dataset computes tags and adjusted sources") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus1.tsv",
                  "i sea you\ti see you\n"
                  "hello world\thello world\n"
                  "a b\ta\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);
  REQUIRE(ds.examples.size() == 3);

  const auto& sub = ds.examples[0];
  CHECK(sub.tags.tags == std::vector<int>{1, -1, 1});
  CHECK(sub.adjusted_ids == sub.source.ids);
  CHECK(sub.tags.target_len == 3);

  const auto& identity = ds.examples[1];
  CHECK(identity.tags.tags == std::vector<int>{1, 1});
  CHECK(identity.adjusted_ids == identity.source.ids);

  const auto& del = ds.examples[2];
  CHECK(del.tags.tags == std::vector<int>{1, 0});
  REQUIRE(del.adjusted_ids.size() == 1);
  CHECK(del.adjusted_ids[0] == del.source.ids[0]);
}

TEST_CASE("build_dataset skips malformed lines and drops empty targets") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus2.tsv",
                  "a b\ta b\n"
                  "no tab here\n"
                  "c d\tc d\n"
                  "e f\t\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);
  CHECK(ds.examples.size() == 2);
  CHECK(ds.skipped_lines == 1);
  CHECK(ds.dropped_empty_target == 1);
}

TEST_CASE("build_dataset fails hard when most lines are malformed") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus3.tsv",
                  "a\ta\n"
                  "broken one\n"
                  "broken two\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  CHECK_THROWS(build_dataset(corpus.path, dict, words, phonemes));
}

TEST_CASE("dataset build is deterministic") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus4.tsv",
                  "i sea you\ti see you\nhello world\thello world\n");
  auto [w1, p1] = build_vocabs(corpus.path, dict);
  auto [w2, p2] = build_vocabs(corpus.path, dict);
  CHECK(w1.content_hash() == w2.content_hash());
  CHECK(p1.content_hash() == p2.content_hash());
  const Dataset a = build_dataset(corpus.path, dict, w1, p1);
  const Dataset b = build_dataset(corpus.path, dict, w2, p2);
  REQUIRE(a.examples.size() == b.examples.size());
  for (size_t i = 0; i < a.examples.size(); ++i) {
    CHECK(a.examples[i].source.ids == b.examples[i].source.ids);
    CHECK(a.examples[i].tags.tags == b.examples[i].tags.tags);
  }
}

TEST_CASE("loss with zero tag weight reduces to pure cross entropy") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus5.tsv", "i sea you\ti see you\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);

  auto mcfg = small_config();
  mcfg.vocab_words = words.size();
  mcfg.vocab_phonemes = phonemes.size();
  const auto params = patc::model::init_params(mcfg, 7);

  TrainConfig tcfg;
  tcfg.tag_loss_weight = 0.0;
  Graph g;
  patc::model::ForwardCtx ctx{g, params, mcfg};
  LossParts parts;
  const Tensor loss = loss_graph(ctx, ds.examples[0], tcfg, &parts);
  CHECK(loss.item() == doctest::Approx(parts.token_ce).epsilon(1e-15));
  CHECK(parts.total == doctest::Approx(parts.token_ce).epsilon(1e-15));
}

TEST_CASE("tag MSE ignores decoder parameters") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus6.tsv", "i sea you\ti see you\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);

  auto mcfg = small_config();
  mcfg.vocab_words = words.size();
  mcfg.vocab_phonemes = phonemes.size();
  const auto params = patc::model::init_params(mcfg, 7);
  auto zeroed = params.clone();
  for (auto& [name, t] : zeroed.t) {
    if (name.rfind("dec.", 0) == 0 || name == "out_proj" || name == "out_b") {
      std::fill(t.data().begin(), t.data().end(), 0.0);
    }
  }

  TrainConfig tcfg;
  LossParts a, b;
  {
    Graph g;
    patc::model::ForwardCtx ctx{g, params, mcfg};
    loss_graph(ctx, ds.examples[0], tcfg, &a);
  }
  {
    Graph g;
    patc::model::ForwardCtx ctx{g, zeroed, mcfg};
    loss_graph(ctx, ds.examples[0], tcfg, &b);
  }
  CHECK(a.tag_mse == doctest::Approx(b.tag_mse).epsilon(1e-15));
  CHECK(a.token_ce != doctest::Approx(b.token_ce).epsilon(1e-12));
}

TEST_CASE("optimizer descends on a frozen example at a tiny learning rate") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus7.tsv", "i sea you tue day\ti see you today\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);

  auto mcfg = small_config();
  mcfg.vocab_words = words.size();
  mcfg.vocab_phonemes = phonemes.size();
  auto params = patc::model::init_params(mcfg, 13);

  TrainConfig tcfg;
  tcfg.lr_peak = 1e-5;
  tcfg.warmup_steps = 1;
  AdamOptimizer opt(tcfg, params);

  std::vector<double> losses;
  for (int step = 0; step < 10; ++step) {
    Graph g;
    patc::model::ForwardCtx ctx{g, params, mcfg};
    LossParts parts;
    const Tensor loss = loss_graph(ctx, ds.examples[0], tcfg, &parts);
    losses.push_back(parts.total);
    g.backward(loss, false);
    opt.step(grads_of(g, params));
  }
  int non_monotone = 0;
  for (size_t i = 1; i < losses.size(); ++i) {
    if (losses[i] >= losses[i - 1]) ++non_monotone;
  }
  CHECK(non_monotone <= 1);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  TempFile corpus("test_train_corpus8.tsv",
                  "i sea you\ti see you\n"
                  "hello word\thello world\n"
                  "the cat sat\tthe cat sat\n"
                  "to bee or not\tto be or not\n");
  auto [words, phonemes] = build_vocabs(corpus.path, dict);
  const Dataset ds = build_dataset(corpus.path, dict, words, phonemes);

  auto mcfg = small_config();
  mcfg.dropout = 0.1;  // exercise the seeded dropout path
  mcfg.vocab_words = words.size();
  mcfg.vocab_phonemes = phonemes.size();

  TrainConfig tcfg;
  tcfg.epochs = 1;
  tcfg.seed = 42;

  std::vector<double> first_losses;
  for (int round = 0; round < 2; ++round) {
    auto params = patc::model::init_params(mcfg, tcfg.seed);
    const TrainResult result = train_loop(ds, mcfg, tcfg, params);
    REQUIRE(result.log.size() == 1);
    first_losses.push_back(result.log[0].mean_loss);
  }
  CHECK(std::abs(first_losses[0] - first_losses[1]) <= 1e-12);
}

TEST_CASE("train_loop rejects an empty dataset") {
  Dataset empty;
  auto mcfg = small_config();
  mcfg.vocab_words = 10;
  mcfg.vocab_phonemes = 10;
  auto params = patc::model::init_params(mcfg, 1);
  TrainConfig tcfg;
  CHECK_THROWS(train_loop(empty, mcfg, tcfg, params));
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.lr_peak = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = TrainConfig{};
  cfg.label_smoothing = 1.0;
  CHECK_THROWS(cfg.validate());
}
