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

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "patc/textphon.hpp"

using namespace patc::textphon;

namespace {

const std::string kDictPath = std::string(PATC_DATA_DIR) + "/cmudict_small.txt";

}  // namespace

TEST_CASE("tokenize lowercases, splits, and strips punctuation") {
  const auto t = tokenize("Hello world");
  CHECK(t.words == std::vector<std::string>{"hello", "world"});
  CHECK(t.n() == 2);

  CHECK(tokenize("don't stop").words ==
        std::vector<std::string>{"don't", "stop"});
  CHECK(tokenize("A  b").words == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("Wait, really?!").words ==
        std::vector<std::string>{"wait", "really"});
}

TEST_CASE("tokenize rejects empty input") {
  CHECK_THROWS(tokenize(""));
  CHECK_THROWS(tokenize("   \t "));
}

TEST_CASE("detokenize round-trips normalized text") {
  const std::string text = "the quick brown fox";
  CHECK(detokenize(tokenize(text).words) == text);
}

TEST_CASE("vocab reserves the special indices") {
  Vocab v(true);
  CHECK(v.size() == 5);
  CHECK(v.symbol(kPad) == "<pad>");
  CHECK(v.symbol(kUnk) == "<unk>");
  CHECK(v.symbol(kBos) == "<bos>");
  CHECK(v.symbol(kEos) == "<eos>");
  CHECK(v.symbol(kWb) == "<wb>");

  Vocab w(false);
  CHECK(w.size() == 4);

  const int i = w.add("hello");
  CHECK(i == 4);
  CHECK(w.add("hello") == i);  // idempotent
  CHECK(w.index("hello") == i);
  CHECK(w.index("absent") == kUnk);
  for (int j = 0; j < w.size(); ++j) CHECK(w.index(w.symbol(j)) == j);
}

TEST_CASE("vocab save/load round-trip preserves order and hash") {
  Vocab v(false);
  v.add("alpha");
  v.add("beta");
  const std::string path = "test_vocab_roundtrip.txt";
  v.save(path);
  const Vocab loaded = Vocab::load(path, false);
  CHECK(loaded.size() == v.size());
  for (int i = 0; i < v.size(); ++i) CHECK(loaded.symbol(i) == v.symbol(i));
  CHECK(loaded.content_hash() == v.content_hash());
  std::remove(path.c_str());

  Vocab other(false);
  other.add("beta");
  other.add("alpha");
  CHECK(other.content_hash() != v.content_hash());
}

TEST_CASE("pronouncing dictionary load handles comments and variants") {
  const auto result = load_pronouncing_dict(kDictPath);
  const auto& dict = result.dict;
  REQUIRE(dict.count("hello") == 1);
  CHECK(dict.at("hello") ==
        std::vector<std::string>{"HH", "AH0", "L", "OW1"});
  REQUIRE(dict.count("world") == 1);
  // The bundled file carries a WORLD(2) variant that must be ignored.
  CHECK(dict.at("world") == std::vector<std::string>{"W", "ER1", "L", "D"});
}

TEST_CASE("g2p looks up the dictionary and inserts word boundaries") {
  const auto dict = load_pronouncing_dict(kDictPath).dict;

  const auto one = g2p({"hello"}, dict);
  CHECK(one.phonemes == std::vector<std::string>{"HH", "AH0", "L", "OW1"});
  CHECK(one.m() == 4);
  REQUIRE(one.word_spans.size() == 1);
  CHECK(one.word_spans[0] == std::pair<int, int>{0, 4});

  const auto two = g2p({"a", "a"}, dict);
  REQUIRE(two.m() == 3);
  CHECK(two.phonemes[1] == "<wb>");
  CHECK(two.phonemes[0] == two.phonemes[2]);
  // The trailing separator belongs to the first word's span.
  CHECK(two.word_spans[0].second == 2);
  CHECK(two.word_spans[1] == std::pair<int, int>{2, 3});
}

TEST_CASE("g2p letter fallback covers out-of-vocabulary words") {
  const auto dict = load_pronouncing_dict(kDictPath).dict;
  const auto seq = g2p({"zzq"}, dict);
  CHECK(seq.phonemes == std::vector<std::string>{"Z", "Z", "K"});

  const auto& table = letter_fallback_table();
  REQUIRE(table.size() == 26);
  CHECK(table[0] == "AH");
  CHECK(table[1] == "B");
  CHECK(table[25] == "Z");
}

TEST_CASE("g2p properties: m >= n, spans partition, determinism") {
  const auto dict = load_pronouncing_dict(kDictPath).dict;
  const std::vector<std::vector<std::string>> inputs = {
      {"hello"},
      {"hello", "world"},
      {"the", "sea", "is", "blue"},
      {"xqzzy", "hello", "qqq"},
      {"one", "two", "three", "four", "five"}};
  for (const auto& words : inputs) {
    const auto seq = g2p(words, dict);
    CHECK(seq.m() >= static_cast<int>(words.size()));
    REQUIRE(seq.word_spans.size() == words.size());
    int cursor = 0;
    for (const auto& [b, e] : seq.word_spans) {
      CHECK(b == cursor);
      CHECK(e > b);
      cursor = e;
    }
    CHECK(cursor == seq.m());

    const auto again = g2p(words, dict);
    CHECK(again.phonemes == seq.phonemes);
    CHECK(again.word_spans == seq.word_spans);
  }
}

TEST_CASE("index_tokens and index_phonemes map through the vocabularies") {
  const auto dict = load_pronouncing_dict(kDictPath).dict;
  Vocab words(false);
  words.add("hello");

  TokenSeq seq = tokenize("hello stranger");
  index_tokens(seq, words);
  REQUIRE(seq.ids.size() == 2);
  CHECK(seq.ids[0] == words.index("hello"));
  CHECK(seq.ids[1] == kUnk);

  Vocab phon(true);
  PhonemeSeq p = g2p({"hello", "hello"}, dict);
  for (const auto& s : p.phonemes) phon.add(s);
  index_phonemes(p, phon);
  REQUIRE(p.ids.size() == p.phonemes.size());
  CHECK(p.ids[4] == kWb);
}
