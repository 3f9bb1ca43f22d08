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

#include "patc/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "patc/infer.hpp"

namespace patc::train {

void TrainConfig::validate() const {
  if (lr_peak <= 0.0) throw std::invalid_argument("lr_peak must be > 0");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw std::invalid_argument("label_smoothing must lie in [0,1)");
  }
  if (warmup_steps < 1) throw std::invalid_argument("warmup_steps must be >= 1");
  if (max_batch_tokens < 8) {
    throw std::invalid_argument("max_batch_tokens too small");
  }
}

std::pair<textphon::Vocab, textphon::Vocab> build_vocabs(
    const std::string& corpus_path, const textphon::PronDict& dict) {
  std::ifstream f(corpus_path);
  if (!f) throw std::runtime_error("cannot read corpus " + corpus_path);
  textphon::Vocab words(false);
  textphon::Vocab phonemes(true);
  std::string line;
  while (std::getline(f, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    for (const std::string& part :
         {line.substr(0, tab), line.substr(tab + 1)}) {
      if (part.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto toks = textphon::tokenize(part).words;
      for (const auto& w : toks) words.add(w);
    }
    const std::string src = line.substr(0, tab);
    if (src.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto ph = textphon::g2p(textphon::tokenize(src).words, dict);
    for (const auto& p : ph.phonemes) phonemes.add(p);
  }
  return {std::move(words), std::move(phonemes)};
}

Dataset build_dataset(const std::string& corpus_path,
                      const textphon::PronDict& dict,
                      const textphon::Vocab& word_vocab,
                      const textphon::Vocab& phoneme_vocab,
                      int max_tag_magnitude) {
  std::ifstream f(corpus_path);
  if (!f) throw std::runtime_error("cannot read corpus " + corpus_path);
  Dataset ds;
  std::string line;
  int total_lines = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    ++total_lines;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      ++ds.skipped_lines;
      continue;
    }
    const std::string src_text = line.substr(0, tab);
    const std::string tgt_text = line.substr(tab + 1);
    if (tgt_text.find_first_not_of(" \t\r") == std::string::npos) {
      ++ds.dropped_empty_target;
      continue;
    }
    TrainingExample ex;
    try {
      ex.source = textphon::tokenize(src_text);
      ex.target = textphon::tokenize(tgt_text);
    } catch (const std::invalid_argument&) {
      ++ds.skipped_lines;
      continue;
    }
    textphon::index_tokens(ex.source, word_vocab);
    textphon::index_tokens(ex.target, word_vocab);
    ex.phonemes = textphon::g2p(ex.source.words, dict);
    textphon::index_phonemes(ex.phonemes, phoneme_vocab);
    const auto path = align::edit_path(ex.source.words, ex.target.words);
    ex.tags = align::path_to_tags(path, ex.source.n());
    for (int t : ex.tags.tags) {
      if (t < -max_tag_magnitude) ++ds.clamped_tags;
    }
    ex.adjusted_ids = align::adjust_source(ex.source.ids, ex.tags);
    ds.examples.push_back(std::move(ex));
  }
  if (total_lines > 0 && ds.skipped_lines * 2 > total_lines) {
    throw std::runtime_error("more than half of " + corpus_path +
                             " was malformed (" +
                             std::to_string(ds.skipped_lines) + "/" +
                             std::to_string(total_lines) + " lines skipped)");
  }
  return ds;
}

Tensor loss_graph(model::ForwardCtx& ctx, const TrainingExample& ex,
                  const TrainConfig& tcfg, LossParts* parts) {
  Graph& g = ctx.g;
  auto enc = model::encode(ctx, ex.source.ids, ex.phonemes.ids);
  Tensor fused = model::fuse(ctx, enc);
  Tensor raw_tags = model::tag_predict(ctx, fused, ex.source.n());

  std::vector<double> tag_targets;
  tag_targets.reserve(ex.tags.tags.size());
  for (int t : ex.tags.tags) {
    tag_targets.push_back(
        std::clamp(t, -ctx.cfg.max_tag_magnitude, 1));
  }
  Tensor tag_loss = g.mse(raw_tags, tag_targets);

  Tensor logits = model::decode(ctx, ex.adjusted_ids, enc.h_w, enc.h_p);
  Tensor token_loss =
      g.cross_entropy_ls(logits, ex.target.ids, tcfg.label_smoothing);

  Tensor total = g.add(token_loss, g.scale(tag_loss, tcfg.tag_loss_weight));
  if (!std::isfinite(total.item())) {
    std::ostringstream os;
    os << "non-finite loss (ce=" << token_loss.item()
       << ", tag_mse=" << tag_loss.item() << ") on example with n="
       << ex.source.n() << " n_hat=" << ex.target.n();
    throw std::runtime_error(os.str());
  }
  if (parts) {
    parts->token_ce = token_loss.item();
    parts->tag_mse = tag_loss.item();
    parts->total = total.item();
  }
  return total;
}

double lr_at(const TrainConfig& cfg, long step) {
  if (step < 1) throw std::invalid_argument("lr_at: step counts from 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  return cfg.lr_peak * std::min(s / w, std::sqrt(w / s));
}

AdamOptimizer::AdamOptimizer(const TrainConfig& cfg, model::ModelParams& params)
    : cfg_(cfg), params_(params) {
  for (const auto& [name, t] : params_.t) {
    m_[name].assign(t.size(), 0.0);
    v_[name].assign(t.size(), 0.0);
  }
}

void AdamOptimizer::step(
    const std::map<std::string, std::vector<double>>& grads) {
  ++step_;
  const double lr = lr_at(cfg_, step_);
  const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, step_);
  const double bc2 = 1.0 - std::pow(b2, step_);
  for (auto& [name, t] : params_.t) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const auto& grad = git->second;
    auto& m = m_[name];
    auto& v = v_[name];
    auto& data = t.data();
    for (size_t i = 0; i < data.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
    }
  }
}

namespace {

long example_tokens(const TrainingExample& ex) {
  return ex.source.n() + ex.phonemes.m() + ex.target.n();
}

std::vector<std::vector<size_t>> make_batches(const Dataset& ds,
                                              const TrainConfig& cfg,
                                              long epoch) {
  std::vector<size_t> order(ds.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x6270 + static_cast<uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  // bucket by length so batches pack similar sizes; stable keeps the shuffle
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return example_tokens(ds.examples[a]) / 16 <
           example_tokens(ds.examples[b]) / 16;
  });
  std::vector<std::vector<size_t>> batches;
  std::vector<size_t> cur;
  long cur_tokens = 0;
  for (size_t idx : order) {
    const long t = example_tokens(ds.examples[idx]);
    if (!cur.empty() && cur_tokens + t > cfg.max_batch_tokens) {
      batches.push_back(std::move(cur));
      cur.clear();
      cur_tokens = 0;
    }
    cur.push_back(idx);
    cur_tokens += t;
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

}  // namespace

double dataset_wer(const Dataset& dataset, const model::ModelConfig& mcfg,
                   const model::ModelParams& params,
                   const textphon::Vocab& word_vocab) {
  long dist = 0, ref_tokens = 0;
  for (const auto& ex : dataset.examples) {
    Graph g;
    model::ForwardCtx ctx{g, params, mcfg, false, nullptr, nullptr, nullptr};
    auto enc = model::encode(ctx, ex.source.ids, ex.phonemes.ids);
    Tensor fused = model::fuse(ctx, enc);
    Tensor raw_tags = model::tag_predict(ctx, fused, ex.source.n());
    const auto tags =
        infer::discretize_tags(raw_tags.data(), mcfg.max_tag_magnitude);
    const auto adjusted = align::adjust_source(ex.source.ids, tags);
    Tensor logits = model::decode(ctx, adjusted, enc.h_w, enc.h_p);
    std::vector<int> out_ids(adjusted.size());
    const int v = logits.cols();
    for (size_t i = 0; i < adjusted.size(); ++i) {
      const double* row = logits.data().data() + i * v;
      out_ids[i] = static_cast<int>(std::max_element(row, row + v) - row);
    }
    dist += align::edit_distance(out_ids, ex.target.ids);
    ref_tokens += ex.target.n();
  }
  (void)word_vocab;
  return ref_tokens == 0 ? 0.0 : static_cast<double>(dist) / ref_tokens;
}

TrainResult train_loop(const Dataset& dataset, const model::ModelConfig& mcfg,
                       const TrainConfig& tcfg, model::ModelParams& params,
                       const TrainOptions& options) {
  tcfg.validate();
  mcfg.validate();
  if (dataset.examples.empty()) {
    throw std::invalid_argument("train_loop: empty dataset");
  }
  TrainResult result;
  AdamOptimizer opt(tcfg, params);
  opt.set_steps_done(options.initial_steps);

  auto save = [&](const std::string& name) {
    if (options.out_dir.empty()) return;
    model::save_checkpoint(options.out_dir + "/" + name, params, mcfg,
                           options.word_vocab_hash, options.phoneme_vocab_hash);
  };

  auto eval_dev = [&]() -> std::optional<double> {
    const Dataset* dev = options.dev ? options.dev : nullptr;
    if (!dev || !options.word_vocab) return std::nullopt;
    return dataset_wer(*dev, mcfg, params, *options.word_vocab);
  };

  bool stop = false;
  for (long epoch = 1; epoch <= tcfg.epochs && !stop; ++epoch) {
    const auto batches = make_batches(dataset, tcfg, epoch);
    double sum_total = 0.0, sum_ce = 0.0, sum_mse = 0.0;
    long examples_seen = 0;
    for (const auto& batch : batches) {
      const size_t bs = batch.size();
      std::vector<std::unique_ptr<Graph>> graphs(bs);
      std::vector<LossParts> parts(bs);
      std::vector<std::string> failures(bs);
      const long step_for_seed = opt.steps_done() + 1;
#pragma omp parallel for schedule(dynamic)
      for (size_t i = 0; i < bs; ++i) {
        try {
          graphs[i] = std::make_unique<Graph>();
          std::mt19937_64 rng(mix_seed(
              tcfg.seed, 0xd0 + static_cast<uint64_t>(step_for_seed) * 4096 +
                             static_cast<uint64_t>(i)));
          model::ForwardCtx ctx{*graphs[i], params,  mcfg, true,
                                &rng,       nullptr, nullptr};
          Tensor loss =
              loss_graph(ctx, dataset.examples[batch[i]], tcfg, &parts[i]);
          graphs[i]->backward(loss, /*write_tensor_grads=*/false);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
      for (const auto& msg : failures) {
        if (!msg.empty()) throw std::runtime_error("train_loop: " + msg);
      }
      // deterministic reduction: fixed example order, then average
      std::map<std::string, std::vector<double>> grad_acc;
      for (size_t i = 0; i < bs; ++i) {
        for (const auto& [name, t] : params.t) {
          const auto& g = graphs[i]->grad_of(t);
          if (g.empty()) continue;
          auto& acc = grad_acc[name];
          if (acc.empty()) acc.assign(t.size(), 0.0);
          for (size_t j = 0; j < g.size(); ++j) acc[j] += g[j];
        }
        sum_total += parts[i].total;
        sum_ce += parts[i].token_ce;
        sum_mse += parts[i].tag_mse;
      }
      examples_seen += static_cast<long>(bs);
      const double inv = 1.0 / static_cast<double>(bs);
      for (auto& [name, acc] : grad_acc) {
        for (auto& v : acc) v *= inv;
      }
      opt.step(grad_acc);
      result.steps = opt.steps_done();

      const double batch_loss =
          std::accumulate(parts.begin(), parts.end(), 0.0,
                          [](double a, const LossParts& p) {
                            return a + p.total;
                          }) /
          bs;
      if (batch_loss > 1e4) {
        save("diverged.patc");
        throw std::runtime_error(
            "train_loop: loss diverged (" + std::to_string(batch_loss) +
            ") at step " + std::to_string(opt.steps_done()));
      }

      if (options.eval_every_steps > 0 &&
          opt.steps_done() % options.eval_every_steps == 0) {
        if (auto wer = eval_dev()) {
          if (!result.best_dev_wer || *wer < *result.best_dev_wer) {
            result.best_dev_wer = wer;
            save("best.patc");
          }
          if (options.stop_at_dev_wer && *wer <= *options.stop_at_dev_wer) {
            result.reached_target = true;
            stop = true;
            break;
          }
        }
      }
      if (options.max_steps > 0 && opt.steps_done() >= options.max_steps) {
        stop = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = opt.steps_done();
    if (examples_seen > 0) {
      rec.mean_loss = sum_total / examples_seen;
      rec.mean_token_ce = sum_ce / examples_seen;
      rec.mean_tag_mse = sum_mse / examples_seen;
    }
    if (options.eval_every_steps == 0) {
      rec.dev_wer = eval_dev();
      if (rec.dev_wer) {
        if (!result.best_dev_wer || *rec.dev_wer < *result.best_dev_wer) {
          result.best_dev_wer = rec.dev_wer;
          save("best.patc");
        }
        if (options.stop_at_dev_wer &&
            *rec.dev_wer <= *options.stop_at_dev_wer) {
          result.reached_target = true;
          stop = true;
        }
      }
    }
    save("epoch-" + std::to_string(epoch) + ".patc");
    result.log.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }
  return result;
}

}  // namespace patc::train
