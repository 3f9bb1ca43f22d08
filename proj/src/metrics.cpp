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

#include "patc/metrics.hpp"

#include <stdexcept>

#include "patc/align.hpp"

namespace patc::metrics {

double wer(const Words& hyp, const Words& ref) {
  if (ref.empty()) throw std::invalid_argument("wer: reference is empty");
  return static_cast<double>(align::edit_distance(hyp, ref)) /
         static_cast<double>(ref.size());
}

double werr(double wer_base, double wer_sys) {
  if (wer_base <= 0.0) {
    throw std::invalid_argument("werr: undefined for baseline WER of 0");
  }
  return (wer_base - wer_sys) / wer_base;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

Detection detection_correction(const Words& hyp, const Words& corrected,
                               const Words& ref) {
  Detection out;
  out.counts.ref_tokens = static_cast<long>(ref.size());
  const int n = static_cast<int>(hyp.size());
  if (n == 0) {
    out.counts.zero_denominator = true;
    return out;
  }
  const auto ref_path = align::edit_path(hyp, ref);
  const auto sys_path = align::edit_path(hyp, corrected);
  const auto ref_tags = align::path_to_tags(ref_path, n);
  const auto sys_tags = align::path_to_tags(sys_path, n);
  const auto ref_spans = align::aligned_targets(ref_path, n);
  const auto sys_spans = align::aligned_targets(sys_path, n);
  for (int i = 0; i < n; ++i) {
    const bool is_error = ref_tags.tags[i] != 1;
    const bool is_edited = sys_tags.tags[i] != 1;
    if (is_error) ++out.counts.error;
    if (is_edited) ++out.counts.edited;
    if (is_error && is_edited) {
      ++out.counts.edited_error;
      Words ref_side, sys_side;
      for (int j : ref_spans[i]) ref_side.push_back(ref[j]);
      for (int j : sys_spans[i]) sys_side.push_back(corrected[j]);
      if (ref_side == sys_side) ++out.counts.correctly_edited_error;
    }
  }
  auto ratio = [&](long num, long den) {
    if (den == 0) {
      out.counts.zero_denominator = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  out.precision = ratio(out.counts.edited_error, out.counts.edited);
  out.recall = ratio(out.counts.edited_error, out.counts.error);
  out.correction =
      ratio(out.counts.correctly_edited_error, out.counts.edited_error);
  out.f05 = f_beta(out.precision, out.recall, 0.5);
  return out;
}

EvalReport evaluate_corpus(const std::vector<Words>& hyp,
                           const std::vector<Words>& corrected,
                           const std::vector<Words>& ref, Aggregation agg) {
  if (hyp.size() != corrected.size() || hyp.size() != ref.size()) {
    throw std::invalid_argument("evaluate_corpus: column lengths differ");
  }
  if (hyp.empty()) throw std::invalid_argument("evaluate_corpus: empty corpus");
  EvalReport report;
  long dist_base = 0, dist_sys = 0, ref_total = 0;
  double per_line_base = 0.0, per_line_sys = 0.0;
  for (size_t i = 0; i < hyp.size(); ++i) {
    if (ref[i].empty()) {
      throw std::invalid_argument("evaluate_corpus: empty reference at line " +
                                  std::to_string(i + 1));
    }
    const int db = align::edit_distance(hyp[i], ref[i]);
    const int ds = align::edit_distance(corrected[i], ref[i]);
    dist_base += db;
    dist_sys += ds;
    ref_total += static_cast<long>(ref[i].size());
    per_line_base += static_cast<double>(db) / ref[i].size();
    per_line_sys += static_cast<double>(ds) / ref[i].size();

    const auto det = detection_correction(hyp[i], corrected[i], ref[i]);
    report.counts.edited += det.counts.edited;
    report.counts.error += det.counts.error;
    report.counts.edited_error += det.counts.edited_error;
    report.counts.correctly_edited_error += det.counts.correctly_edited_error;
    report.counts.zero_denominator |= det.counts.zero_denominator;
  }
  report.counts.ref_tokens = ref_total;
  if (agg == Aggregation::Pooled) {
    report.wer_base = static_cast<double>(dist_base) / ref_total;
    report.wer_sys = static_cast<double>(dist_sys) / ref_total;
  } else {
    report.wer_base = per_line_base / hyp.size();
    report.wer_sys = per_line_sys / hyp.size();
  }
  if (report.wer_base > 0.0) {
    report.werr = werr(report.wer_base, report.wer_sys);
  }
  auto ratio = [&](long num, long den) {
    if (den == 0) {
      report.counts.zero_denominator = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  report.precision = ratio(report.counts.edited_error, report.counts.edited);
  report.recall = ratio(report.counts.edited_error, report.counts.error);
  report.correction = ratio(report.counts.correctly_edited_error,
                            report.counts.edited_error);
  report.f_beta = f_beta(report.precision, report.recall, 0.5);
  return report;
}

}  // namespace patc::metrics
