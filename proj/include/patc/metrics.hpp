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

#ifndef PATC_METRICS_HPP
#define PATC_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

namespace patc::metrics {

struct DetectionCounts {
  long edited = 0;
  long error = 0;
  long edited_error = 0;
  long correctly_edited_error = 0;
  long ref_tokens = 0;
  bool zero_denominator = false;  // some ratio fell back to 0
};

struct EvalReport {
  double wer_base = 0.0;  // hypothesis vs reference
  double wer_sys = 0.0;   // corrected vs reference
  std::optional<double> werr;  // undefined when wer_base == 0
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;  // beta = 0.5
  double correction = 0.0;
  DetectionCounts counts;
};

using Words = std::vector<std::string>;

// Unit-cost edit distance over reference length. Empty hypothesis allowed;
// empty reference is an error.
double wer(const Words& hyp, const Words& ref);

// Relative WER reduction; wer_base must be > 0.
double werr(double wer_base, double wer_sys);

struct Detection {
  double precision = 0.0;
  double recall = 0.0;
  double f05 = 0.0;
  double correction = 0.0;
  DetectionCounts counts;
};

// Error tokens come from align(hyp -> ref), edited tokens from
// align(hyp -> corrected); an edited error token counts as correctly edited
// when its aligned corrected span equals its aligned reference span.
Detection detection_correction(const Words& hyp, const Words& corrected,
                               const Words& ref);

double f_beta(double precision, double recall, double beta);

enum class Aggregation { Pooled, PerLine };

// Corpus evaluation over (hypothesis, corrected, reference) triples.
// Pooled WER divides total edit distance by total reference tokens; PerLine
// averages per-line WERs with equal weight.
EvalReport evaluate_corpus(const std::vector<Words>& hyp,
                           const std::vector<Words>& corrected,
                           const std::vector<Words>& ref,
                           Aggregation agg = Aggregation::Pooled);

}  // namespace patc::metrics

#endif  // PATC_METRICS_HPP
