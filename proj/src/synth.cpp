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

#include "patc/synth.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <stdexcept>

#include "patc/align.hpp"
#include "patc/tensor.hpp"

namespace patc::synth {

void NoiseConfig::validate() const {
  for (double p : {p_sub, p_del, p_ins, homophone_fraction}) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("noise probabilities must lie in [0,1]");
    }
  }
  if (p_sub + p_del + p_ins > 1.0) {
    throw std::invalid_argument("p_sub + p_del + p_ins must be <= 1");
  }
  if (target_wer && (*target_wer <= 0.0 || *target_wer >= 1.0)) {
    throw std::invalid_argument("target_wer must lie in (0,1)");
  }
}

std::string strip_stress(const std::string& phoneme) {
  std::string out;
  for (char c : phoneme) {
    if (!std::isdigit(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

const std::vector<std::string>& HomophoneIndex::lookup(
    const std::string& phoneme_key) const {
  static const std::vector<std::string> empty;
  auto it = buckets.find(phoneme_key);
  return it == buckets.end() ? empty : it->second;
}

std::string HomophoneIndex::key_of(const std::string& word,
                                   const textphon::PronDict& dict) const {
  auto it = dict.find(word);
  if (it == dict.end()) return "";
  std::string key;
  for (const auto& p : it->second) {
    if (!key.empty()) key += ' ';
    key += strip_stress(p);
  }
  return key;
}

HomophoneIndex build_homophone_index(const textphon::PronDict& dict) {
  HomophoneIndex index;
  for (const auto& [word, phones] : dict) {
    std::string key;
    for (const auto& p : phones) {
      if (!key.empty()) key += ' ';
      key += strip_stress(p);
    }
    index.buckets[key].push_back(word);
  }
  for (auto& [key, bucket] : index.buckets) {
    std::sort(bucket.begin(), bucket.end());
  }
  return index;
}

namespace {

struct Probs {
  double sub, del, ins;
};

std::vector<std::string> corrupt_impl(const std::vector<std::string>& clean,
                                      const Probs& probs,
                                      double homophone_fraction,
                                      std::mt19937_64& rng,
                                      const HomophoneIndex& index,
                                      const std::vector<std::string>& vocab,
                                      const textphon::PronDict& dict,
                                      CorpusReport* counts) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_word = [&](const std::string& not_this) -> std::string {
    if (vocab.empty()) return not_this;
    std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
    for (int tries = 0; tries < 16; ++tries) {
      const std::string& w = vocab[pick(rng)];
      if (w != not_this) return w;
    }
    return vocab[pick(rng)];
  };
  std::vector<std::string> noisy;
  for (const auto& word : clean) {
    const double roll = u(rng);
    if (roll < probs.sub) {
      std::string repl;
      const auto key = index.key_of(word, dict);
      const auto& bucket = index.lookup(key);
      const bool homophone_coin = u(rng) < homophone_fraction;
      if (homophone_coin && bucket.size() >= 2) {
        std::uniform_int_distribution<size_t> pick(0, bucket.size() - 2);
        size_t i = pick(rng);
        // skip over the word itself
        if (bucket[i] == word) i = bucket.size() - 1;
        repl = bucket[i];
        if (counts) ++counts->homophone_substitutions;
      } else {
        repl = random_word(word);
      }
      noisy.push_back(repl);
      if (counts) ++counts->substitutions;
    } else if (roll < probs.sub + probs.del) {
      if (counts) ++counts->deletions;
    } else if (roll < probs.sub + probs.del + probs.ins) {
      noisy.push_back(word);
      noisy.push_back(random_word(""));
      if (counts) ++counts->insertions;
    } else {
      noisy.push_back(word);
    }
  }
  if (noisy.empty() && !clean.empty()) {
    // survivor rule: never emit an empty noisy sentence
    std::uniform_int_distribution<size_t> pick(0, clean.size() - 1);
    noisy.push_back(clean[pick(rng)]);
  }
  return noisy;
}

std::vector<std::string> read_clean_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read clean corpus " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty()) {
    throw std::runtime_error("clean corpus " + path + " has no sentences");
  }
  return lines;
}

std::vector<std::string> corpus_vocab(
    const std::vector<std::vector<std::string>>& token_lines) {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, bool> seen;
  for (const auto& toks : token_lines) {
    for (const auto& w : toks) {
      if (!seen.emplace(w, true).second) continue;
      vocab.push_back(w);
    }
  }
  return vocab;
}

double realized_wer(const std::vector<std::vector<std::string>>& clean,
                    const std::vector<std::vector<std::string>>& noisy) {
  long dist = 0, tokens = 0;
  for (size_t i = 0; i < clean.size(); ++i) {
    dist += align::edit_distance(noisy[i], clean[i]);
    tokens += static_cast<long>(clean[i].size());
  }
  return tokens == 0 ? 0.0 : static_cast<double>(dist) / tokens;
}

}  // namespace

std::vector<std::string> corrupt(const std::vector<std::string>& clean,
                                 const NoiseConfig& cfg,
                                 const HomophoneIndex& index,
                                 const std::vector<std::string>& vocab,
                                 const textphon::PronDict& dict) {
  cfg.validate();
  if (clean.empty()) throw std::invalid_argument("corrupt: empty sentence");
  std::mt19937_64 rng(cfg.seed);
  return corrupt_impl(clean, {cfg.p_sub, cfg.p_del, cfg.p_ins},
                      cfg.homophone_fraction, rng, index, vocab, dict, nullptr);
}

CorpusReport generate_corpus(const std::string& clean_path,
                             const NoiseConfig& cfg,
                             const std::string& out_path,
                             const textphon::PronDict& dict) {
  cfg.validate();
  const auto lines = read_clean_lines(clean_path);
  std::vector<std::vector<std::string>> clean_tokens(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    clean_tokens[i] = textphon::tokenize(lines[i]).words;
  }
  const auto vocab = corpus_vocab(clean_tokens);
  const auto index = build_homophone_index(dict);

  Probs probs{cfg.p_sub, cfg.p_del, cfg.p_ins};
  if (cfg.target_wer) {
    // calibration pre-pass on a sample, rescaling all three probabilities
    const size_t sample_n = std::min<size_t>(1000, clean_tokens.size());
    for (int iter = 0; iter < 6; ++iter) {
      std::vector<std::vector<std::string>> sample_noisy(sample_n);
      for (size_t i = 0; i < sample_n; ++i) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0xCA1 + iter * 1000003 + i));
        sample_noisy[i] =
            corrupt_impl(clean_tokens[i], probs, cfg.homophone_fraction, rng,
                         index, vocab, dict, nullptr);
      }
      std::vector<std::vector<std::string>> sample_clean(
          clean_tokens.begin(), clean_tokens.begin() + sample_n);
      const double wer = realized_wer(sample_clean, sample_noisy);
      if (wer > 0.0 &&
          std::abs(wer - *cfg.target_wer) / *cfg.target_wer < 0.03) {
        break;
      }
      double factor = wer > 0.0 ? *cfg.target_wer / wer : 2.0;
      factor = std::clamp(factor, 0.1, 10.0);
      probs.sub *= factor;
      probs.del *= factor;
      probs.ins *= factor;
      const double total = probs.sub + probs.del + probs.ins;
      if (total > 0.95) {
        const double s = 0.95 / total;
        probs.sub *= s;
        probs.del *= s;
        probs.ins *= s;
      }
    }
  }

  CorpusReport report;
  report.p_sub_used = probs.sub;
  report.p_del_used = probs.del;
  report.p_ins_used = probs.ins;

  std::vector<std::vector<std::string>> noisy_tokens(clean_tokens.size());
  std::vector<CorpusReport> line_counts(clean_tokens.size());
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < clean_tokens.size(); ++i) {
    std::mt19937_64 rng(mix_seed(cfg.seed, i));
    noisy_tokens[i] =
        corrupt_impl(clean_tokens[i], probs, cfg.homophone_fraction, rng, index,
                     vocab, dict, &line_counts[i]);
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write corpus " + out_path);
  for (size_t i = 0; i < clean_tokens.size(); ++i) {
    out << textphon::detokenize(noisy_tokens[i]) << '\t'
        << textphon::detokenize(clean_tokens[i]) << '\n';
    report.substitutions += line_counts[i].substitutions;
    report.deletions += line_counts[i].deletions;
    report.insertions += line_counts[i].insertions;
    report.homophone_substitutions += line_counts[i].homophone_substitutions;
    report.clean_tokens += static_cast<long>(clean_tokens[i].size());
  }
  report.lines = static_cast<long>(clean_tokens.size());
  report.realized_wer = realized_wer(clean_tokens, noisy_tokens);
  return report;
}

}  // namespace patc::synth
