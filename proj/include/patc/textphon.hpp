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

#ifndef PATC_TEXTPHON_HPP
#define PATC_TEXTPHON_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace patc::textphon {

// Reserved vocab slots. WB exists only in phoneme vocabularies.
inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kWb = 4;

class Vocab {
 public:
  // with_wb: reserve index 4 for the word-boundary symbol (phoneme vocabs).
  explicit Vocab(bool with_wb = false);

  int add(const std::string& symbol);  // idempotent
  int index(const std::string& symbol) const;  // kUnk if absent
  bool contains(const std::string& symbol) const;
  const std::string& symbol(int index) const;
  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  void save(const std::string& path) const;  // one symbol per line
  static Vocab load(const std::string& path, bool with_wb = false);
  uint64_t content_hash() const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

struct TokenSeq {
  std::vector<std::string> words;  // surface forms, normalized
  std::vector<int> ids;            // empty until index() is called
  int n() const { return static_cast<int>(words.size()); }
};

struct PhonemeSeq {
  std::vector<std::string> phonemes;
  std::vector<int> ids;
  // Half-open phoneme range produced by each source word; a word's trailing
  // WB separator belongs to its own span. Spans partition [0, m).
  std::vector<std::pair<int, int>> word_spans;
  int m() const { return static_cast<int>(phonemes.size()); }
};

// Lowercase, whitespace-split, surrounding punctuation stripped (intra-word
// apostrophes survive). Throws on empty / whitespace-only input.
TokenSeq tokenize(const std::string& text);

std::string detokenize(const std::vector<std::string>& words);

// Fill TokenSeq::ids against a vocabulary (unknown words map to UNK).
void index_tokens(TokenSeq& seq, const Vocab& vocab);

using PronDict = std::unordered_map<std::string, std::vector<std::string>>;

struct DictLoadResult {
  PronDict dict;
  int skipped_lines = 0;
};

// CMUdict plain text: "WORD  PH1 PH2 ...", ";;;" comments, "WORD(2)" variants
// ignored in favor of the first pronunciation.
DictLoadResult load_pronouncing_dict(const std::string& path);

// Concatenate per-word pronunciations with a single WB separator between
// words. OOV words fall back to one phoneme per letter, so every word yields
// at least one phoneme and m >= n always holds.
PhonemeSeq g2p(const std::vector<std::string>& words, const PronDict& dict);

void index_phonemes(PhonemeSeq& seq, const Vocab& vocab);

// The fixed letter -> phoneme fallback table (26 entries, 'a'..'z').
const std::vector<std::string>& letter_fallback_table();

}  // namespace patc::textphon

#endif  // PATC_TEXTPHON_HPP
