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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "patc/synth.hpp"
#include "patc/train.hpp"

using namespace patc::synth;

namespace {

const std::string kDictPath = std::string(PATC_DATA_DIR) + "/cmudict_small.txt";

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> dict_vocab(const patc::textphon::PronDict& dict) {
  std::vector<std::string> vocab;
  vocab.reserve(dict.size());
  for (const auto& [w, _] : dict) vocab.push_back(w);
  std::sort(vocab.begin(), vocab.end());
  return vocab;
}

}  // namespace

TEST_CASE("strip_stress removes trailing digits only") {
  CHECK(strip_stress("IY1") == "IY");
  CHECK(strip_stress("AH0") == "AH");
  CHECK(strip_stress("S") == "S");
}

TEST_CASE("homophone index groups sea and see") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  const auto index = build_homophone_index(dict);
  const std::string key = index.key_of("sea", dict);
  REQUIRE(!key.empty());
  CHECK(key == index.key_of("see", dict));
  const auto& bucket = index.lookup(key);
  CHECK(std::find(bucket.begin(), bucket.end(), "sea") != bucket.end());
  CHECK(std::find(bucket.begin(), bucket.end(), "see") != bucket.end());

  CHECK(index.lookup("NO SUCH KEY").empty());
  CHECK(index.key_of("zzzzz", dict).empty());
}

TEST_CASE("zero probabilities leave the input untouched") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  const auto index = build_homophone_index(dict);
  const auto vocab = dict_vocab(dict);
  NoiseConfig cfg;
  cfg.p_sub = cfg.p_del = cfg.p_ins = 0.0;
  const std::vector<std::string> clean = {"i", "see", "you"};
  CHECK(corrupt(clean, cfg, index, vocab, dict) == clean);
}

TEST_CASE("the survivor rule keeps at least one token") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  const auto index = build_homophone_index(dict);
  const auto vocab = dict_vocab(dict);
  NoiseConfig cfg;
  cfg.p_sub = 0.0;
  cfg.p_del = 1.0;
  cfg.p_ins = 0.0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const auto noisy = corrupt({"hello"}, cfg, index, vocab, dict);
    REQUIRE(noisy.size() == 1);
    CHECK(noisy[0] == "hello");
  }
}

TEST_CASE("forced homophone substitution stays inside the bucket") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  const auto index = build_homophone_index(dict);
  const auto vocab = dict_vocab(dict);
  NoiseConfig cfg;
  cfg.p_sub = 1.0;
  cfg.p_del = 0.0;
  cfg.p_ins = 0.0;
  cfg.homophone_fraction = 1.0;
  const std::vector<std::string> clean = {"i", "see", "you"};
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    const auto noisy = corrupt(clean, cfg, index, vocab, dict);
    REQUIRE(noisy.size() == clean.size());
    for (size_t i = 0; i < clean.size(); ++i) {
      const auto key = index.key_of(clean[i], dict);
      const auto& bucket = index.lookup(key);
      if (bucket.size() >= 2) {
        // Substitution must be a different word from the same bucket.
        CHECK(noisy[i] != clean[i]);
        CHECK(std::find(bucket.begin(), bucket.end(), noisy[i]) !=
              bucket.end());
      } else {
        // No homophone available: a random vocabulary word was used.
        CHECK(noisy[i] != clean[i]);
      }
    }
  }
}

TEST_CASE("corrupt is deterministic per seed") {
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  const auto index = build_homophone_index(dict);
  const auto vocab = dict_vocab(dict);
  NoiseConfig cfg;
  cfg.p_sub = 0.3;
  cfg.p_del = 0.1;
  cfg.p_ins = 0.1;
  cfg.seed = 7;
  const std::vector<std::string> clean = {"the", "sea", "is", "blue", "today"};
  const auto a = corrupt(clean, cfg, index, vocab, dict);
  const auto b = corrupt(clean, cfg, index, vocab, dict);
  CHECK(a == b);
}

TEST_CASE("noise config validation") {
  NoiseConfig cfg;
  cfg.p_sub = 0.7;
  cfg.p_del = 0.4;
  cfg.p_ins = 0.0;
  CHECK_THROWS(cfg.validate());  // sum > 1
  cfg = NoiseConfig{};
  cfg.p_del = -0.1;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("generate_corpus writes one pair per line, byte-deterministically") {
  std::string text;
  for (int i = 0; i < 50; ++i) {
    text += "the sea is blue and the sun is warm today\n";
    text += "i see you and you hear me\n";
  }
  TempFile clean("test_synth_clean1.txt", text);
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  NoiseConfig cfg;
  cfg.p_sub = 0.15;
  cfg.p_del = 0.05;
  cfg.p_ins = 0.05;
  cfg.seed = 7;

  const std::string out1 = "test_synth_out1.tsv";
  const std::string out2 = "test_synth_out2.tsv";
  const auto r1 = generate_corpus(clean.path, cfg, out1, dict);
  const auto r2 = generate_corpus(clean.path, cfg, out2, dict);
  CHECK(r1.lines == 100);
  CHECK(r1.realized_wer > 0.0);
  CHECK(slurp(out1) == slurp(out2));

  // Every line is a 2-column TSV.
  std::ifstream f(out1);
  std::string line;
  long lines = 0;
  while (std::getline(f, line)) {
    ++lines;
    CHECK(line.find('\t') != std::string::npos);
  }
  CHECK(lines == 100);

  // The trainer consumes the output without skipping anything.
  auto [words, phonemes] = patc::train::build_vocabs(out1, dict);
  const auto ds = patc::train::build_dataset(out1, dict, words, phonemes);
  CHECK(ds.examples.size() == 100);
  CHECK(ds.skipped_lines == 0);

  std::remove(out1.c_str());
  std::remove(out2.c_str());
}

TEST_CASE("different seeds give different corpora") {
  std::string text;
  for (int i = 0; i < 30; ++i) text += "the sea is blue and i see you\n";
  TempFile clean("test_synth_clean2.txt", text);
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  NoiseConfig cfg;
  cfg.p_sub = 0.2;
  cfg.p_del = 0.05;
  cfg.p_ins = 0.05;

  const std::string out1 = "test_synth_out3.tsv";
  const std::string out2 = "test_synth_out4.tsv";
  cfg.seed = 1;
  generate_corpus(clean.path, cfg, out1, dict);
  cfg.seed = 2;
  generate_corpus(clean.path, cfg, out2, dict);
  CHECK(slurp(out1) != slurp(out2));
  std::remove(out1.c_str());
  std::remove(out2.c_str());
}

TEST_CASE("operation frequencies converge to the configured probabilities") {
  std::string text;
  for (int i = 0; i < 1500; ++i) {
    text += "the sea is blue and the sun is warm today\n";
  }
  TempFile clean("test_synth_clean3.txt", text);
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  NoiseConfig cfg;
  cfg.p_sub = 0.10;
  cfg.p_del = 0.04;
  cfg.p_ins = 0.03;
  cfg.seed = 11;
  const std::string out = "test_synth_out5.tsv";
  const auto report = generate_corpus(clean.path, cfg, out, dict);
  std::remove(out.c_str());

  REQUIRE(report.clean_tokens == 1500 * 10);
  const double n = static_cast<double>(report.clean_tokens);
  const auto within3sigma = [&](long count, double p) {
    const double sigma = std::sqrt(n * p * (1.0 - p));
    return std::abs(count - n * p) <= 3.0 * sigma;
  };
  CHECK(within3sigma(report.substitutions, cfg.p_sub));
  CHECK(within3sigma(report.deletions, cfg.p_del));
  CHECK(within3sigma(report.insertions, cfg.p_ins));
  CHECK(report.homophone_substitutions <= report.substitutions);
  CHECK(report.homophone_substitutions > 0);
}

TEST_CASE("target WER calibration lands near the requested rate") {
  std::string text;
  for (int i = 0; i < 2000; ++i) {
    text += "the sea is blue and the sun is warm today\n";
  }
  TempFile clean("test_synth_clean4.txt", text);
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  NoiseConfig cfg;
  cfg.seed = 7;
  cfg.target_wer = 0.2;
  const std::string out = "test_synth_out6.tsv";
  const auto report = generate_corpus(clean.path, cfg, out, dict);
  std::remove(out.c_str());
  CHECK(report.realized_wer == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("generate_corpus rejects an empty input file") {
  TempFile clean("test_synth_clean5.txt", "");
  const auto dict = patc::textphon::load_pronouncing_dict(kDictPath).dict;
  NoiseConfig cfg;
  const std::string out = "test_synth_out7.tsv";
  CHECK_THROWS(generate_corpus(clean.path, cfg, out, dict));
  std::remove(out.c_str());
}
