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

#include "patc/textphon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace patc::textphon {

namespace {

const char* kReserved[] = {"<pad>", "<unk>", "<bos>", "<eos>", "<wb>"};

bool is_strip_char(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Vocab::Vocab(bool with_wb) {
  const int reserved = with_wb ? 5 : 4;
  for (int i = 0; i < reserved; ++i) add(kReserved[i]);
}

int Vocab::add(const std::string& symbol) {
  auto it = index_.find(symbol);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  symbols_.push_back(symbol);
  index_.emplace(symbol, id);
  return id;
}

int Vocab::index(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& symbol) const {
  return index_.count(symbol) > 0;
}

const std::string& Vocab::symbol(int index) const {
  if (index < 0 || index >= size()) {
    throw std::out_of_range("vocab index " + std::to_string(index) +
                            " outside [0," + std::to_string(size()) + ")");
  }
  return symbols_[index];
}

void Vocab::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write vocab file " + path);
  for (const auto& s : symbols_) f << s << '\n';
}

Vocab Vocab::load(const std::string& path, bool with_wb) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read vocab file " + path);
  Vocab v(with_wb);
  std::string line;
  int i = 0;
  const int reserved = with_wb ? 5 : 4;
  while (std::getline(f, line)) {
    if (i < reserved) {
      if (line != v.symbols_[i]) {
        throw std::runtime_error("vocab file " + path +
                                 " has unexpected reserved symbol '" + line +
                                 "' at index " + std::to_string(i));
      }
    } else {
      v.add(line);
    }
    ++i;
  }
  return v;
}

uint64_t Vocab::content_hash() const {
  // FNV-1a over newline-joined symbols.
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : symbols_) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    h ^= '\n';
    h *= 0x100000001b3ull;
  }
  return h;
}

TokenSeq tokenize(const std::string& text) {
  TokenSeq out;
  std::istringstream is(text);
  std::string raw;
  while (is >> raw) {
    size_t b = 0, e = raw.size();
    while (b < e && is_strip_char(raw[b])) ++b;
    while (e > b && is_strip_char(raw[e - 1])) --e;
    // a token that was pure punctuation is dropped
    std::string w = lower(raw.substr(b, e - b));
    if (!w.empty()) out.words.push_back(std::move(w));
  }
  if (out.words.empty()) {
    throw std::invalid_argument("tokenize: input has no tokens");
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

void index_tokens(TokenSeq& seq, const Vocab& vocab) {
  seq.ids.clear();
  seq.ids.reserve(seq.words.size());
  for (const auto& w : seq.words) seq.ids.push_back(vocab.index(w));
}

DictLoadResult load_pronouncing_dict(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read pronouncing dictionary " + path);
  DictLoadResult res;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line.rfind(";;;", 0) == 0) continue;
    std::istringstream is(line);
    std::string word;
    is >> word;
    std::vector<std::string> phones;
    std::string ph;
    while (is >> ph) phones.push_back(ph);
    if (word.empty() || phones.empty()) {
      ++res.skipped_lines;
      continue;
    }
    // variant entries like WORD(2) keep only the first pronunciation
    const auto paren = word.find('(');
    if (paren != std::string::npos) {
      if (paren == 0) {
        ++res.skipped_lines;
        continue;
      }
      word = word.substr(0, paren);
      if (res.dict.count(lower(word))) continue;
    }
    res.dict.emplace(lower(word), std::move(phones));
  }
  return res;
}

const std::vector<std::string>& letter_fallback_table() {
  static const std::vector<std::string> table = {
      "AH", "B", "K", "D", "EH", "F", "G", "HH", "IH", "JH", "K", "L", "M",
      "N",  "OW", "P", "K", "R", "S", "T",  "AH", "V", "W",  "K", "Y", "Z"};
  return table;
}

namespace {

std::vector<std::string> spell_out(const std::string& word) {
  std::vector<std::string> phones;
  const auto& table = letter_fallback_table();
  for (char c : word) {
    const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lc >= 'a' && lc <= 'z') phones.push_back(table[lc - 'a']);
  }
  if (phones.empty()) phones.push_back("AH");  // digits, stray symbols
  return phones;
}

}  // namespace

PhonemeSeq g2p(const std::vector<std::string>& words, const PronDict& dict) {
  PhonemeSeq out;
  for (size_t i = 0; i < words.size(); ++i) {
    const int start = out.m();
    auto it = dict.find(lower(words[i]));
    const std::vector<std::string> phones =
        it != dict.end() ? it->second : spell_out(words[i]);
    for (const auto& p : phones) out.phonemes.push_back(p);
    if (i + 1 < words.size()) out.phonemes.push_back("<wb>");
    out.word_spans.emplace_back(start, out.m());
  }
  return out;
}

void index_phonemes(PhonemeSeq& seq, const Vocab& vocab) {
  seq.ids.clear();
  seq.ids.reserve(seq.phonemes.size());
  for (const auto& p : seq.phonemes) seq.ids.push_back(vocab.index(p));
}

}  // namespace patc::textphon
