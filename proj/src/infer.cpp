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

#include "patc/infer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace patc::infer {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

align::TagSeq discretize_tags(const std::vector<double>& raw,
                              int max_tag_magnitude) {
  align::TagSeq out;
  out.tags.reserve(raw.size());
  bool any_nonzero = false;
  for (double v : raw) {
    int t = static_cast<int>(std::round(v));  // round halves away from zero
    t = std::clamp(t, -max_tag_magnitude, 1);
    any_nonzero |= t != 0;
    out.tags.push_back(t);
  }
  if (!any_nonzero && !raw.empty()) {
    const auto best =
        std::max_element(raw.begin(), raw.end()) - raw.begin();
    out.tags[best] = 1;
  }
  for (int t : out.tags) out.target_len += std::abs(t);
  return out;
}

Corrector::Corrector(model::ModelConfig cfg, model::ModelParams params,
                     textphon::Vocab word_vocab, textphon::Vocab phoneme_vocab,
                     textphon::PronDict dict)
    : cfg_(std::move(cfg)),
      params_(std::move(params)),
      word_vocab_(std::move(word_vocab)),
      phoneme_vocab_(std::move(phoneme_vocab)),
      dict_(std::move(dict)) {
  cfg_.validate();
  if (cfg_.vocab_words != word_vocab_.size() ||
      cfg_.vocab_phonemes != phoneme_vocab_.size()) {
    throw std::invalid_argument(
        "checkpoint/vocab mismatch: config expects vocabularies of " +
        std::to_string(cfg_.vocab_words) + "/" +
        std::to_string(cfg_.vocab_phonemes) + ", got " +
        std::to_string(word_vocab_.size()) + "/" +
        std::to_string(phoneme_vocab_.size()));
  }
}

CorrectionResult Corrector::correct(const std::string& text) const {
  return run(textphon::tokenize(text).words, false);
}

CorrectionResult Corrector::correct_words(
    const std::vector<std::string>& words) const {
  if (words.empty()) throw std::invalid_argument("correct: empty input");
  return run(words, false);
}

CorrectionResult Corrector::run(const std::vector<std::string>& words,
                                bool ar_sim) const {
  const auto t_start = Clock::now();
  CorrectionResult res;

  textphon::TokenSeq tokens;
  tokens.words = words;
  textphon::index_tokens(tokens, word_vocab_);
  auto phonemes = textphon::g2p(tokens.words, dict_);
  textphon::index_phonemes(phonemes, phoneme_vocab_);

  Graph g;
  model::ForwardStats stats;
  model::ForwardCtx ctx{g, params_, cfg_, /*training=*/false, nullptr, nullptr,
                        &stats};

  const auto t_enc = Clock::now();
  auto enc = model::encode(ctx, tokens.ids, phonemes.ids);
  res.timing.encode_ms = ms_since(t_enc);

  const auto t_tag = Clock::now();
  Tensor fused = model::fuse(ctx, enc);
  Tensor raw_tags = model::tag_predict(ctx, fused, tokens.n());
  res.predicted_tags = discretize_tags(raw_tags.data(), cfg_.max_tag_magnitude);
  res.timing.tag_ms = ms_since(t_tag);

  const auto adjusted_ids = align::adjust_source(tokens.ids, res.predicted_tags);
  const int n_hat = static_cast<int>(adjusted_ids.size());

  const auto t_dec = Clock::now();
  std::vector<int> out_ids(n_hat);
  if (!ar_sim) {
    Tensor logits = model::decode(ctx, adjusted_ids, enc.h_w, enc.h_p);
    const int v = logits.cols();
    for (int i = 0; i < n_hat; ++i) {
      const double* row = logits.data().data() + static_cast<size_t>(i) * v;
      out_ids[i] =
          static_cast<int>(std::max_element(row, row + v) - row);
    }
  } else {
    // token-by-token re-decoding over growing prefixes; wall time only
    for (int t = 1; t <= n_hat; ++t) {
      Graph step_graph;
      model::ForwardCtx step_ctx{step_graph, params_, cfg_, false, nullptr,
                                 nullptr, &stats};
      std::vector<int> prefix(adjusted_ids.begin(), adjusted_ids.begin() + t);
      Tensor logits = model::decode(step_ctx, prefix, enc.h_w, enc.h_p,
                                    /*causal_mask=*/true);
      const int v = logits.cols();
      const double* row =
          logits.data().data() + static_cast<size_t>(t - 1) * v;
      out_ids[t - 1] =
          static_cast<int>(std::max_element(row, row + v) - row);
    }
  }
  res.timing.decode_ms = ms_since(t_dec);
  res.decoder_passes = stats.decoder_passes;

  res.corrected.reserve(out_ids.size());
  for (int id : out_ids) res.corrected.push_back(word_vocab_.symbol(id));
  res.corrected_text = textphon::detokenize(res.corrected);
  res.timing.total_ms = ms_since(t_start);
  return res;
}

BenchReport Corrector::bench(const std::vector<std::string>& texts,
                             BenchMode mode, int repeats, int warmup) const {
  if (texts.empty()) throw std::invalid_argument("bench: no input sentences");
  if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
  BenchReport report;
  report.mode = mode;
  report.repeats = repeats;
  report.warmup = warmup;
  report.note =
      mode == BenchMode::ArSim
          ? "ar_sim replays the same decoder token by token as a latency "
            "baseline; its outputs are not used for accuracy claims"
          : "single-pass NAR correction pipeline";
  std::vector<double> samples;
  for (const auto& text : texts) {
    const auto words = textphon::tokenize(text).words;
    for (int i = 0; i < warmup; ++i) run(words, mode == BenchMode::ArSim);
    BenchSentence s;
    double total = 0.0;
    for (int i = 0; i < repeats; ++i) {
      const auto r = run(words, mode == BenchMode::ArSim);
      total += r.timing.total_ms;
      s.n_hat = r.predicted_tags.target_len;
      s.decoder_passes = r.decoder_passes;
    }
    s.ms = total / repeats;
    samples.push_back(s.ms);
    report.sentences.push_back(s);
  }
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  report.mean_ms = sum / samples.size();
  report.median_ms = samples[samples.size() / 2];
  report.p95_ms =
      samples[std::min(samples.size() - 1,
                       static_cast<size_t>(samples.size() * 95 / 100))];
  return report;
}

}  // namespace patc::infer
