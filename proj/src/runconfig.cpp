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

#include "patc/runconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace patc {

using nlohmann::json;

namespace {

long to_long(const std::string& v) { return std::stol(v); }
double to_double(const std::string& v) { return std::stod(v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto& m = model;
  auto& t = train;
  auto& n = noise;
  if (key == "d_h") m.d_h = static_cast<int>(to_long(value));
  else if (key == "n_layers_text") m.n_layers_text = static_cast<int>(to_long(value));
  else if (key == "n_layers_phon") m.n_layers_phon = static_cast<int>(to_long(value));
  else if (key == "n_layers_dec") m.n_layers_dec = static_cast<int>(to_long(value));
  else if (key == "n_heads") m.n_heads = static_cast<int>(to_long(value));
  else if (key == "d_mlp") m.d_mlp = static_cast<int>(to_long(value));
  else if (key == "n_conv_tagp") m.n_conv_tagp = static_cast<int>(to_long(value));
  else if (key == "conv_kernel") m.conv_kernel = static_cast<int>(to_long(value));
  else if (key == "n_mlp_tagp") m.n_mlp_tagp = static_cast<int>(to_long(value));
  else if (key == "n_cross_blocks") m.n_cross_blocks = static_cast<int>(to_long(value));
  else if (key == "dropout") m.dropout = to_double(value);
  else if (key == "fusion") m.fusion = model::fusion_from_name(value);
  else if (key == "max_tag_magnitude") m.max_tag_magnitude = static_cast<int>(to_long(value));
  else if (key == "max_seq_len") m.max_seq_len = static_cast<int>(to_long(value));
  else if (key == "lr_peak") t.lr_peak = to_double(value);
  else if (key == "warmup_steps") t.warmup_steps = to_long(value);
  else if (key == "max_batch_tokens") t.max_batch_tokens = to_long(value);
  else if (key == "label_smoothing") t.label_smoothing = to_double(value);
  else if (key == "tag_loss_weight") t.tag_loss_weight = to_double(value);
  else if (key == "epochs") t.epochs = to_long(value);
  else if (key == "seed") set_seed(static_cast<uint64_t>(to_long(value)));
  else if (key == "adam_beta1") t.adam_beta1 = to_double(value);
  else if (key == "adam_beta2") t.adam_beta2 = to_double(value);
  else if (key == "adam_eps") t.adam_eps = to_double(value);
  else if (key == "p_sub") n.p_sub = to_double(value);
  else if (key == "p_del") n.p_del = to_double(value);
  else if (key == "p_ins") n.p_ins = to_double(value);
  else if (key == "homophone_fraction") n.homophone_fraction = to_double(value);
  else if (key == "target_wer") n.target_wer = to_double(value);
  else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void RunConfig::set_seed(uint64_t seed) {
  train.seed = seed;
  noise.seed = seed;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json j = json::parse(text);
    for (const auto& [key, value] : j.items()) {
      std::string v = value.is_string() ? value.get<std::string>() : value.dump();
      set(key, v);
    }
    return;
  }
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: '" + s + "'");
    }
    set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

std::string RunConfig::echo() const {
  json j{{"d_h", model.d_h},
         {"n_layers_text", model.n_layers_text},
         {"n_layers_phon", model.n_layers_phon},
         {"n_layers_dec", model.n_layers_dec},
         {"n_heads", model.n_heads},
         {"d_mlp", model.d_mlp},
         {"n_conv_tagp", model.n_conv_tagp},
         {"conv_kernel", model.conv_kernel},
         {"n_mlp_tagp", model.n_mlp_tagp},
         {"n_cross_blocks", model.n_cross_blocks},
         {"dropout", model.dropout},
         {"fusion", model::fusion_name(model.fusion)},
         {"max_tag_magnitude", model.max_tag_magnitude},
         {"max_seq_len", model.max_seq_len},
         {"lr_peak", train.lr_peak},
         {"warmup_steps", train.warmup_steps},
         {"max_batch_tokens", train.max_batch_tokens},
         {"label_smoothing", train.label_smoothing},
         {"tag_loss_weight", train.tag_loss_weight},
         {"epochs", train.epochs},
         {"seed", train.seed},
         {"p_sub", noise.p_sub},
         {"p_del", noise.p_del},
         {"p_ins", noise.p_ins},
         {"homophone_fraction", noise.homophone_fraction}};
  if (noise.target_wer) j["target_wer"] = *noise.target_wer;
  return j.dump(2);
}

}  // namespace patc
