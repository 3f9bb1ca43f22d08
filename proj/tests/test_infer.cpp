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

#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "patc/infer.hpp"

using namespace patc::infer;

namespace {

const std::string kDictPath = std::string(PATC_DATA_DIR) + "/cmudict_small.txt";

Corrector make_corrector(patc::model::Fusion fusion) {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  patc::textphon::Vocab words(false);
  patc::textphon::Vocab phonemes(true);
  for (const std::string w :
       {"i", "sea", "see", "you", "hello", "world", "the", "cat"}) {
    words.add(w);
    const auto seq = patc::textphon::g2p({w}, dict);
    for (const auto& p : seq.phonemes) phonemes.add(p);
  }
  patc::model::ModelConfig cfg;
  cfg.d_h = 16;
  cfg.n_layers_text = 1;
  cfg.n_layers_phon = 1;
  cfg.n_layers_dec = 1;
  cfg.n_heads = 2;
  cfg.d_mlp = 32;
  cfg.n_conv_tagp = 2;
  cfg.dropout = 0.0;
  cfg.fusion = fusion;
  cfg.vocab_words = words.size();
  cfg.vocab_phonemes = phonemes.size();
  auto params = patc::model::init_params(cfg, 99);
  return Corrector(cfg, std::move(params), std::move(words),
                   std::move(phonemes), dict);
}

int abs_sum(const std::vector<int>& tags) {
  int s = 0;
  for (int t : tags) s += std::abs(t);
  return s;
}

}  // namespace

TEST_CASE("discretize_tags rounds half away from zero and clamps") {
  const auto a = discretize_tags({0.6, -1.4}, 4);
  CHECK(a.tags == std::vector<int>{1, -1});
  CHECK(a.target_len == 2);

  // Half-away-from-zero: -0.5 substitutes rather than deletes.
  const auto b = discretize_tags({-0.5, 0.5, 1.5}, 4);
  CHECK(b.tags == std::vector<int>{-1, 1, 1});

  const auto c = discretize_tags({-9.0}, 4);
  CHECK(c.tags == std::vector<int>{-4});
  CHECK(c.target_len == 4);

  // Values above 1 clamp down to keep.
  const auto d = discretize_tags({3.7}, 4);
  CHECK(d.tags == std::vector<int>{1});
}

TEST_CASE("discretize_tags rescues an all-zero prediction at the argmax") {
  const auto t = discretize_tags({0.2, 0.1}, 4);
  CHECK(t.tags == std::vector<int>{1, 0});
  CHECK(t.target_len == 1);

  const auto u = discretize_tags({-0.3, 0.4, 0.1}, 4);
  CHECK(u.tags == std::vector<int>{0, 1, 0});
}

TEST_CASE("correct() is deterministic and single-pass") {
  const auto corrector = make_corrector(patc::model::Fusion::CrossAtten);
  const auto r1 = corrector.correct("i sea you");
  const auto r2 = corrector.correct("i sea you");
  CHECK(r1.corrected == r2.corrected);
  CHECK(r1.predicted_tags.tags == r2.predicted_tags.tags);
  CHECK(r1.decoder_passes == 1);
  CHECK(r2.decoder_passes == 1);
}

TEST_CASE("corrected length equals the absolute tag sum") {
  for (const auto fusion :
       {patc::model::Fusion::Concat, patc::model::Fusion::Add,
        patc::model::Fusion::Max, patc::model::Fusion::CrossAtten}) {
    const auto corrector = make_corrector(fusion);
    for (const std::string text :
         {"i sea you", "hello world", "the cat", "hello hello hello world"}) {
      const auto r = corrector.correct(text);
      CHECK(static_cast<int>(r.corrected.size()) ==
            abs_sum(r.predicted_tags.tags));
      CHECK(r.decoder_passes == 1);
      CHECK(!r.corrected_text.empty());
    }
  }
}

TEST_CASE("timing components add up to the total") {
  const auto corrector = make_corrector(patc::model::Fusion::Concat);
  const auto r = corrector.correct("hello world you see");
  const double parts = r.timing.encode_ms + r.timing.tag_ms + r.timing.decode_ms;
  CHECK(r.timing.total_ms >= parts * 0.5);
  CHECK(parts <= r.timing.total_ms * 1.1 + 0.5);
}

TEST_CASE("correct rejects empty input") {
  const auto corrector = make_corrector(patc::model::Fusion::Concat);
  CHECK_THROWS(corrector.correct(""));
  CHECK_THROWS(corrector.correct("   "));
}

TEST_CASE("corrector rejects a config/vocab size mismatch") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  patc::textphon::Vocab words(false);
  words.add("hello");
  patc::textphon::Vocab phonemes(true);
  patc::model::ModelConfig cfg;
  cfg.d_h = 16;
  cfg.n_heads = 2;
  cfg.vocab_words = words.size() + 3;  // wrong on purpose
  cfg.vocab_phonemes = phonemes.size();
  auto params = patc::model::init_params(cfg, 1);
  CHECK_THROWS(Corrector(cfg, std::move(params), std::move(words),
                         std::move(phonemes), dict));
}

TEST_CASE("bench: nar runs one pass per sentence, ar_sim one per position") {
  const auto corrector = make_corrector(patc::model::Fusion::CrossAtten);
  const std::vector<std::string> texts = {"i sea you", "hello world the cat"};

  const auto nar = corrector.bench(texts, BenchMode::Nar, 2, 1);
  REQUIRE(nar.sentences.size() == texts.size());
  for (const auto& s : nar.sentences) CHECK(s.decoder_passes == 1);
  CHECK(nar.mean_ms > 0.0);
  CHECK(nar.repeats == 2);

  const auto ar = corrector.bench(texts, BenchMode::ArSim, 2, 1);
  REQUIRE(ar.sentences.size() == texts.size());
  for (const auto& s : ar.sentences) {
    CHECK(s.decoder_passes == s.n_hat);
    CHECK(s.n_hat >= 1);
  }
  CHECK(!ar.note.empty());
}

TEST_CASE("bench rejects an empty text list") {
  const auto corrector = make_corrector(patc::model::Fusion::Concat);
  CHECK_THROWS(corrector.bench({}, BenchMode::Nar, 1, 0));
}
