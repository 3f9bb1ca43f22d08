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

#ifndef PATC_SYNTH_HPP
#define PATC_SYNTH_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patc/textphon.hpp"

namespace patc::synth {

struct NoiseConfig {
  double p_sub = 0.1;
  double p_del = 0.03;
  double p_ins = 0.03;
  double homophone_fraction = 0.8;
  uint64_t seed = 1;
  std::optional<double> target_wer;  // scales the probabilities when set

  void validate() const;  // probabilities in [0,1], sum <= 1
};

// Words grouped by their stress-stripped first pronunciation.
struct HomophoneIndex {
  std::map<std::string, std::vector<std::string>> buckets;

  const std::vector<std::string>& lookup(const std::string& phoneme_key) const;
  // Pronunciation key for a word ("" when the word is not in the dictionary).
  std::string key_of(const std::string& word,
                     const textphon::PronDict& dict) const;
};

std::string strip_stress(const std::string& phoneme);

HomophoneIndex build_homophone_index(const textphon::PronDict& dict);

// Per-token independent corruption: substitute (homophone-biased), delete,
// or insert-after. At least one token always survives. Deterministic for a
// given seed.
std::vector<std::string> corrupt(const std::vector<std::string>& clean,
                                 const NoiseConfig& cfg,
                                 const HomophoneIndex& index,
                                 const std::vector<std::string>& vocab,
                                 const textphon::PronDict& dict);

struct CorpusReport {
  long lines = 0;
  long clean_tokens = 0;
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long homophone_substitutions = 0;
  double realized_wer = 0.0;
  double p_sub_used = 0.0;
  double p_del_used = 0.0;
  double p_ins_used = 0.0;
};

// Reads one clean sentence per line, writes TSV "noisy \t clean". When
// target_wer is set a calibration pre-pass on a sample rescales the three
// probabilities before the full run.
CorpusReport generate_corpus(const std::string& clean_path,
                             const NoiseConfig& cfg,
                             const std::string& out_path,
                             const textphon::PronDict& dict);

}  // namespace patc::synth

#endif  // PATC_SYNTH_HPP
