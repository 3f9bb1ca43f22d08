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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "patc/align.hpp"
#include "patc/infer.hpp"
#include "patc/metrics.hpp"
#include "patc/model.hpp"
#include "patc/runconfig.hpp"
#include "patc/synth.hpp"
#include "patc/textphon.hpp"
#include "patc/train.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file,
                  "config file (JSON object or key=value lines)");
  cmd->add_option("--set", opts.sets, "override a config key, key=value");
  cmd->add_option("--seed", opts.seed, "run seed");
}

patc::RunConfig resolve_config(const CommonOpts& opts) {
  patc::RunConfig cfg;
  if (!opts.config_file.empty()) cfg.load_file(opts.config_file);
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed) cfg.set_seed(*opts.seed);
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
  } else {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    while (std::getline(f, line)) lines.push_back(line);
  }
  return lines;
}

std::string pick_checkpoint(const std::string& model_dir) {
  const fs::path best = fs::path(model_dir) / "best.patc";
  if (fs::exists(best)) return best.string();
  int top = -1;
  for (const auto& e : fs::directory_iterator(model_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("epoch-", 0) == 0 && name.size() > 11) {
      top = std::max(top, std::atoi(name.substr(6).c_str()));
    }
  }
  if (top < 0) {
    throw std::runtime_error("no checkpoint found in " + model_dir);
  }
  return (fs::path(model_dir) / ("epoch-" + std::to_string(top) + ".patc"))
      .string();
}

patc::infer::Corrector load_corrector(const std::string& model_dir,
                                      const std::string& ckpt_override,
                                      const std::string& dict_path) {
  const std::string ckpt_path =
      ckpt_override.empty() ? pick_checkpoint(model_dir) : ckpt_override;
  auto ckpt = patc::model::load_checkpoint(ckpt_path);
  auto wv = patc::textphon::Vocab::load(
      (fs::path(model_dir) / "words.vocab").string(), false);
  auto pv = patc::textphon::Vocab::load(
      (fs::path(model_dir) / "phonemes.vocab").string(), true);
  if (ckpt.word_vocab_hash != wv.content_hash() ||
      ckpt.phoneme_vocab_hash != pv.content_hash()) {
    throw std::runtime_error("checkpoint " + ckpt_path +
                             " does not match the vocab files in " + model_dir);
  }
  auto dict = patc::textphon::load_pronouncing_dict(dict_path).dict;
  return patc::infer::Corrector(ckpt.cfg, std::move(ckpt.params), std::move(wv),
                                std::move(pv), std::move(dict));
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

int cmd_align(const std::string& input, const std::string& out_path,
              bool strict) {
  const auto lines = read_lines(input);
  std::ostringstream out;
  int lineno = 0;
  for (const auto& line : lines) {
    ++lineno;
    const auto tab = line.find('\t');
    try {
      if (tab == std::string::npos) {
        throw std::invalid_argument("no tab separator");
      }
      const auto src = patc::textphon::tokenize(line.substr(0, tab)).words;
      const std::string tgt_text = line.substr(tab + 1);
      std::vector<std::string> tgt;
      if (tgt_text.find_first_not_of(" \t\r") != std::string::npos) {
        tgt = patc::textphon::tokenize(tgt_text).words;
      }
      const auto path = patc::align::edit_path(src, tgt);
      const auto tags =
          patc::align::path_to_tags(path, static_cast<int>(src.size()));
      out << patc::textphon::detokenize(src) << '\t'
          << patc::textphon::detokenize(tgt) << '\t';
      for (size_t i = 0; i < tags.tags.size(); ++i) {
        if (i) out << ' ';
        out << tags.tags[i];
      }
      out << '\n';
    } catch (const std::exception& e) {
      std::cerr << "align: line " << lineno << ": " << e.what() << '\n';
      if (strict) return 1;
    }
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << out.str();
  } else {
    write_text(out_path, out.str());
  }
  return 0;
}

int cmd_train(const patc::RunConfig& run, const std::string& corpus,
              const std::string& dict_path, const std::string& dev_corpus,
              const std::string& out_dir, long max_steps,
              std::optional<double> stop_wer, long eval_every,
              const std::string& resume) {
  fs::create_directories(out_dir);
  auto dict = patc::textphon::load_pronouncing_dict(dict_path).dict;
  auto [wv, pv] = patc::train::build_vocabs(corpus, dict);
  wv.save((fs::path(out_dir) / "words.vocab").string());
  pv.save((fs::path(out_dir) / "phonemes.vocab").string());

  patc::model::ModelConfig mcfg = run.model;
  mcfg.vocab_words = wv.size();
  mcfg.vocab_phonemes = pv.size();

  auto dataset = patc::train::build_dataset(corpus, dict, wv, pv,
                                            mcfg.max_tag_magnitude);
  std::cerr << "dataset: " << dataset.examples.size() << " examples, "
            << dataset.skipped_lines << " skipped, "
            << dataset.dropped_empty_target << " empty targets dropped\n";
  if (dataset.clamped_tags > 0) {
    std::cerr << "warning: " << dataset.clamped_tags
              << " tags exceed max_tag_magnitude and will be clamped\n";
  }

  std::optional<patc::train::Dataset> dev;
  if (!dev_corpus.empty()) {
    dev = patc::train::build_dataset(dev_corpus, dict, wv, pv,
                                     mcfg.max_tag_magnitude);
  }

  patc::model::ModelParams params;
  long initial_steps = 0;
  if (!resume.empty()) {
    auto ckpt = patc::model::load_checkpoint(resume);
    if (ckpt.word_vocab_hash != wv.content_hash()) {
      throw std::runtime_error("resume checkpoint vocab differs from corpus");
    }
    mcfg = ckpt.cfg;
    params = std::move(ckpt.params);
    const fs::path state = fs::path(out_dir) / "train_state.json";
    if (fs::exists(state)) {
      std::ifstream f(state);
      json j;
      f >> j;
      initial_steps = j.value("steps", 0L);
    }
  } else {
    params = patc::model::init_params(mcfg, run.train.seed);
  }

  std::cerr << "model parameters: " << params.param_count() << "\n";
  write_text((fs::path(out_dir) / "run.json").string(), run.echo() + "\n");

  std::ofstream metrics_log(fs::path(out_dir) / "metrics.jsonl",
                            std::ios::app);
  patc::train::TrainOptions opts;
  opts.out_dir = out_dir;
  if (dev) opts.dev = &*dev;
  opts.stop_at_dev_wer = stop_wer;
  opts.max_steps = max_steps;
  opts.initial_steps = initial_steps;
  opts.eval_every_steps = eval_every;
  opts.word_vocab_hash = wv.content_hash();
  opts.phoneme_vocab_hash = pv.content_hash();
  opts.word_vocab = &wv;
  opts.dict = &dict;
  opts.on_epoch = [&](const patc::train::EpochRecord& rec) {
    json j{{"epoch", rec.epoch},
           {"steps", rec.steps},
           {"loss", rec.mean_loss},
           {"token_ce", rec.mean_token_ce},
           {"tag_mse", rec.mean_tag_mse}};
    if (rec.dev_wer) j["dev_wer"] = *rec.dev_wer;
    metrics_log << j.dump() << '\n' << std::flush;
    std::cerr << "epoch " << rec.epoch << " steps " << rec.steps << " loss "
              << rec.mean_loss;
    if (rec.dev_wer) std::cerr << " dev_wer " << *rec.dev_wer;
    std::cerr << '\n';
  };

  const auto result =
      patc::train::train_loop(dataset, mcfg, run.train, params, opts);
  write_text((fs::path(out_dir) / "train_state.json").string(),
             json{{"steps", result.steps}}.dump() + "\n");
  return 0;
}

json timing_json(const patc::infer::Timing& t) {
  return json{{"encode_ms", t.encode_ms},
              {"tag_ms", t.tag_ms},
              {"decode_ms", t.decode_ms},
              {"total_ms", t.total_ms}};
}

int cmd_correct(const std::string& model_dir, const std::string& ckpt,
                const std::string& dict_path, const std::string& input,
                const std::string& trace_path, bool as_json) {
  const auto corrector = load_corrector(model_dir, ckpt, dict_path);
  const auto lines = read_lines(input);
  std::ostringstream trace;
  json out = json::array();
  for (const auto& line : lines) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto res = corrector.correct(line);
    if (as_json) {
      out.push_back({{"input", line},
                     {"corrected", res.corrected_text},
                     {"tags", res.predicted_tags.tags},
                     {"decoder_passes", res.decoder_passes},
                     {"timing", timing_json(res.timing)}});
    } else {
      std::cout << res.corrected_text << '\n';
    }
    if (!trace_path.empty()) {
      trace << line << '\t' << res.corrected_text << '\t';
      for (size_t i = 0; i < res.predicted_tags.tags.size(); ++i) {
        if (i) trace << ' ';
        trace << res.predicted_tags.tags[i];
      }
      trace << '\n';
    }
  }
  if (as_json) std::cout << out.dump(2) << '\n';
  if (!trace_path.empty()) write_text(trace_path, trace.str());
  return 0;
}

json report_to_json(const patc::metrics::EvalReport& r) {
  json j{{"wer_base", r.wer_base},
         {"wer_sys", r.wer_sys},
         {"precision", r.precision},
         {"recall", r.recall},
         {"f0_5", r.f_beta},
         {"correction", r.correction},
         {"counts",
          {{"edited", r.counts.edited},
           {"error", r.counts.error},
           {"edited_error", r.counts.edited_error},
           {"correctly_edited_error", r.counts.correctly_edited_error},
           {"ref_tokens", r.counts.ref_tokens},
           {"zero_denominator", r.counts.zero_denominator}}}};
  if (r.werr) {
    j["werr_percent"] = *r.werr * 100.0;
  } else {
    j["werr_percent"] = nullptr;
  }
  return j;
}

int cmd_eval(const std::string& input, bool per_line, bool as_json) {
  const auto lines = read_lines(input);
  std::vector<patc::metrics::Words> hyp, cor, ref;
  int lineno = 0;
  for (const auto& line : lines) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw std::runtime_error("eval: line " + std::to_string(lineno) +
                               " is not a 3-column TSV");
    }
    auto split = [](const std::string& s) -> patc::metrics::Words {
      if (s.find_first_not_of(" \t\r") == std::string::npos) return {};
      return patc::textphon::tokenize(s).words;
    };
    hyp.push_back(split(line.substr(0, t1)));
    cor.push_back(split(line.substr(t1 + 1, t2 - t1 - 1)));
    ref.push_back(split(line.substr(t2 + 1)));
  }
  const auto report = patc::metrics::evaluate_corpus(
      hyp, cor, ref,
      per_line ? patc::metrics::Aggregation::PerLine
               : patc::metrics::Aggregation::Pooled);
  if (as_json) {
    std::cout << report_to_json(report).dump(2) << '\n';
  } else {
    auto pct = [](double v) { return v * 100.0; };
    std::cout << "WER (baseline):  " << pct(report.wer_base) << "%\n"
              << "WER (corrected): " << pct(report.wer_sys) << "%\n";
    if (report.werr) {
      std::cout << "WERR:            " << pct(*report.werr) << "%\n";
    } else {
      std::cout << "WERR:            n/a (baseline WER is 0)\n";
    }
    std::cout << "Precision:       " << report.precision << '\n'
              << "Recall:          " << report.recall << '\n'
              << "F0.5:            " << report.f_beta << '\n'
              << "Correction:      " << report.correction << '\n';
  }
  return 0;
}

int cmd_bench(const std::string& model_dir, const std::string& ckpt,
              const std::string& dict_path, const std::string& input,
              const std::string& mode, int repeats, int warmup,
              const std::string& out_path) {
  const auto corrector = load_corrector(model_dir, ckpt, dict_path);
  std::vector<std::string> texts;
  for (const auto& line : read_lines(input)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      texts.push_back(line);
    }
  }
  const auto m = mode == "ar_sim" ? patc::infer::BenchMode::ArSim
                                  : patc::infer::BenchMode::Nar;
  const auto report = corrector.bench(texts, m, repeats, warmup);
  json sentences = json::array();
  for (const auto& s : report.sentences) {
    sentences.push_back(
        {{"n_hat", s.n_hat}, {"ms", s.ms}, {"decoder_passes", s.decoder_passes}});
  }
  const json j{{"mode", mode},
               {"note", report.note},
               {"repeats", report.repeats},
               {"warmup", report.warmup},
               {"mean_ms", report.mean_ms},
               {"median_ms", report.median_ms},
               {"p95_ms", report.p95_ms},
               {"sentences", sentences}};
  if (out_path.empty() || out_path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(out_path, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("PATC_THREADS")) {
#ifdef _OPENMP
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
#endif
  }

  CLI::App app{"PATCorrect: phoneme-augmented NAR ASR error correction"};
  app.require_subcommand(1);

  // align
  auto* align_cmd = app.add_subcommand(
      "align", "emit edit tags for source/target TSV pairs");
  std::string align_in, align_out;
  bool align_strict = false;
  align_cmd->add_option("input", align_in, "TSV file (source \\t target), - for stdin");
  align_cmd->add_option("--out", align_out, "output path (default stdout)");
  align_cmd->add_flag("--strict", align_strict, "fail on malformed lines");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  CommonOpts train_common;
  add_common(train_cmd, train_common);
  std::string train_corpus, train_dict, train_dev, train_out, train_resume;
  long train_max_steps = 0, train_eval_every = 0;
  std::optional<double> train_stop_wer;
  train_cmd->add_option("--corpus", train_corpus, "training TSV (source \\t target)")
      ->required();
  train_cmd->add_option("--dict", train_dict, "pronouncing dictionary")->required();
  train_cmd->add_option("--dev", train_dev, "dev TSV for per-epoch WER");
  train_cmd->add_option("--out-dir", train_out, "output directory")->required();
  train_cmd->add_option("--max-steps", train_max_steps, "stop after N optimizer steps");
  train_cmd->add_option("--eval-every", train_eval_every, "dev eval every N steps");
  train_cmd->add_option("--stop-wer", train_stop_wer, "early stop at dev WER");
  train_cmd->add_option("--resume", train_resume, "checkpoint to resume from");

  // correct
  auto* correct_cmd = app.add_subcommand("correct", "correct sentences");
  std::string cor_model, cor_ckpt, cor_dict, cor_in, cor_trace;
  bool cor_json = false;
  correct_cmd->add_option("--model", cor_model, "model directory")->required();
  correct_cmd->add_option("--ckpt", cor_ckpt, "explicit checkpoint file");
  correct_cmd->add_option("--dict", cor_dict, "pronouncing dictionary")->required();
  correct_cmd->add_option("input", cor_in, "sentence file, - for stdin");
  correct_cmd->add_option("--trace", cor_trace, "write tag trace TSV");
  correct_cmd->add_flag("--json", cor_json, "machine-readable output");

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "score a hypothesis/corrected/reference TSV");
  std::string eval_in;
  bool eval_per_line = false, eval_json = false;
  eval_cmd->add_option("input", eval_in, "3-column TSV, - for stdin");
  eval_cmd->add_flag("--per-line", eval_per_line,
                     "equal-weight per-line aggregation instead of pooled");
  eval_cmd->add_flag("--json", eval_json, "machine-readable output");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a noisy corpus");
  CommonOpts synth_common;
  add_common(synth_cmd, synth_common);
  std::string synth_clean, synth_out, synth_dict, synth_report;
  bool synth_json = false;
  synth_cmd->add_option("--clean", synth_clean, "clean text, one sentence per line")
      ->required();
  synth_cmd->add_option("--out", synth_out, "output TSV (noisy \\t clean)")
      ->required();
  synth_cmd->add_option("--dict", synth_dict, "pronouncing dictionary")->required();
  synth_cmd->add_option("--report", synth_report, "write report JSON here");
  synth_cmd->add_flag("--json", synth_json, "print report JSON to stdout");
  std::optional<double> synth_target;
  synth_cmd->add_option("--target-wer", synth_target, "calibrate to this WER");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "latency benchmark");
  std::string bench_model, bench_ckpt, bench_dict, bench_in, bench_mode = "nar",
              bench_out;
  int bench_repeats = 5, bench_warmup = 3;
  bench_cmd->add_option("--model", bench_model, "model directory")->required();
  bench_cmd->add_option("--ckpt", bench_ckpt, "explicit checkpoint file");
  bench_cmd->add_option("--dict", bench_dict, "pronouncing dictionary")->required();
  bench_cmd->add_option("--input", bench_in, "sentence file")->required();
  bench_cmd->add_option("--mode", bench_mode, "nar or ar_sim")
      ->check(CLI::IsMember({"nar", "ar_sim"}));
  bench_cmd->add_option("--repeats", bench_repeats, "timed repeats per sentence");
  bench_cmd->add_option("--warmup", bench_warmup, "warmup iterations");
  bench_cmd->add_option("--json", bench_out, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (align_cmd->parsed()) {
      return cmd_align(align_in, align_out, align_strict);
    }
    if (train_cmd->parsed()) {
      return cmd_train(resolve_config(train_common), train_corpus, train_dict,
                       train_dev, train_out, train_max_steps, train_stop_wer,
                       train_eval_every, train_resume);
    }
    if (correct_cmd->parsed()) {
      return cmd_correct(cor_model, cor_ckpt, cor_dict, cor_in, cor_trace,
                         cor_json);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_in, eval_per_line, eval_json);
    }
    if (synth_cmd->parsed()) {
      auto run = resolve_config(synth_common);
      if (synth_target) run.noise.target_wer = *synth_target;
      const auto dict = patc::textphon::load_pronouncing_dict(synth_dict).dict;
      const auto report =
          patc::synth::generate_corpus(synth_clean, run.noise, synth_out, dict);
      const json j{{"lines", report.lines},
                   {"clean_tokens", report.clean_tokens},
                   {"substitutions", report.substitutions},
                   {"deletions", report.deletions},
                   {"insertions", report.insertions},
                   {"homophone_substitutions", report.homophone_substitutions},
                   {"realized_wer", report.realized_wer},
                   {"p_sub_used", report.p_sub_used},
                   {"p_del_used", report.p_del_used},
                   {"p_ins_used", report.p_ins_used}};
      if (!synth_report.empty()) {
        write_text(synth_report, j.dump(2) + "\n");
      }
      if (synth_json) {
        std::cout << j.dump(2) << '\n';
      } else if (synth_report.empty()) {
        std::cerr << j.dump(2) << '\n';
      }
      return 0;
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_model, bench_ckpt, bench_dict, bench_in,
                       bench_mode, bench_repeats, bench_warmup, bench_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
