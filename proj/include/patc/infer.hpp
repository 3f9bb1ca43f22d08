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

#ifndef PATC_INFER_HPP
#define PATC_INFER_HPP

#include <string>
#include <vector>

#include "patc/align.hpp"
#include "patc/model.hpp"
#include "patc/textphon.hpp"

namespace patc::infer {

struct Timing {
  double encode_ms = 0.0;
  double tag_ms = 0.0;
  double decode_ms = 0.0;
  double total_ms = 0.0;
};

struct CorrectionResult {
  std::vector<std::string> corrected;
  std::string corrected_text;
  align::TagSeq predicted_tags;
  Timing timing;
  long decoder_passes = 0;
};

// Round half away from zero, clamp to [-max_tag_magnitude, 1]. An all-zero
// prediction promotes the position with the largest raw value to 1 so the
// output is never empty.
align::TagSeq discretize_tags(const std::vector<double>& raw,
                              int max_tag_magnitude);

enum class BenchMode { Nar, ArSim };

struct BenchSentence {
  int n_hat = 0;
  double ms = 0.0;
  long decoder_passes = 0;
};

struct BenchReport {
  BenchMode mode = BenchMode::Nar;
  // ar_sim re-decodes with the same weights token by token; it exists to
  // measure latency scaling, not output quality.
  std::string note;
  int repeats = 0;
  int warmup = 0;
  std::vector<BenchSentence> sentences;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

// Single-pass NAR correction around a trained checkpoint.
class Corrector {
 public:
  Corrector(model::ModelConfig cfg, model::ModelParams params,
            textphon::Vocab word_vocab, textphon::Vocab phoneme_vocab,
            textphon::PronDict dict);

  CorrectionResult correct(const std::string& text) const;
  CorrectionResult correct_words(const std::vector<std::string>& words) const;

  BenchReport bench(const std::vector<std::string>& texts, BenchMode mode,
                    int repeats, int warmup = 3) const;

  const model::ModelConfig& config() const { return cfg_; }
  const textphon::Vocab& word_vocab() const { return word_vocab_; }
  const textphon::Vocab& phoneme_vocab() const { return phoneme_vocab_; }

 private:
  CorrectionResult run(const std::vector<std::string>& words,
                       bool ar_sim) const;

  model::ModelConfig cfg_;
  model::ModelParams params_;
  textphon::Vocab word_vocab_;
  textphon::Vocab phoneme_vocab_;
  textphon::PronDict dict_;
};

}  // namespace patc::infer

#endif  // PATC_INFER_HPP
