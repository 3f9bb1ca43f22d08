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

#include "patc/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace patc::model {

using nlohmann::json;

std::string fusion_name(Fusion f) {
  switch (f) {
    case Fusion::Concat: return "concat";
    case Fusion::Add: return "add";
    case Fusion::Max: return "max";
    case Fusion::CrossAtten: return "cross_atten";
  }
  return "?";
}

Fusion fusion_from_name(const std::string& name) {
  if (name == "concat") return Fusion::Concat;
  if (name == "add") return Fusion::Add;
  if (name == "max") return Fusion::Max;
  if (name == "cross_atten") return Fusion::CrossAtten;
  throw std::invalid_argument("unknown fusion mode '" + name + "'");
}

void ModelConfig::validate() const {
  if (d_h <= 0 || d_h % n_heads != 0) {
    throw std::invalid_argument("d_h (" + std::to_string(d_h) +
                                ") must be a positive multiple of n_heads (" +
                                std::to_string(n_heads) + ")");
  }
  if (conv_kernel % 2 == 0) {
    throw std::invalid_argument("conv_kernel must be odd for same-length conv");
  }
  if (n_layers_text < 1 || n_layers_phon < 1 || n_layers_dec < 1 ||
      n_conv_tagp < 1 || n_mlp_tagp < 1 || n_cross_blocks < 1) {
    throw std::invalid_argument("layer counts must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("dropout must lie in [0,1)");
  }
  if (max_tag_magnitude < 1) {
    throw std::invalid_argument("max_tag_magnitude must be >= 1");
  }
}

ModelConfig paper_config() {
  ModelConfig c;
  c.d_h = 512;
  c.n_layers_text = c.n_layers_phon = c.n_layers_dec = 6;
  c.n_heads = 8;
  c.d_mlp = 2048;
  return c;
}

Tensor& ModelParams::at(const std::string& name) {
  auto it = t.find(name);
  if (it == t.end()) throw std::out_of_range("missing parameter '" + name + "'");
  return it->second;
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = t.find(name);
  if (it == t.end()) throw std::out_of_range("missing parameter '" + name + "'");
  return it->second;
}

size_t ModelParams::param_count() const {
  size_t n = 0;
  for (const auto& [name, tensor] : t) n += tensor.size();
  return n;
}

std::vector<Tensor> ModelParams::all() const {
  std::vector<Tensor> out;
  out.reserve(t.size());
  for (const auto& [name, tensor] : t) out.push_back(tensor);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams c;
  for (const auto& [name, tensor] : t) c.t.emplace(name, tensor.clone());
  return c;
}

namespace {

void add_matrix(ModelParams& p, const std::string& name, int r, int c,
                std::mt19937_64& rng) {
  Tensor t({r, c}, true);
  xavier_init(t, r, c, rng);
  p.t.emplace(name, t);
}

void add_vector(ModelParams& p, const std::string& name, int d, double fill) {
  Tensor t({d}, true);
  for (auto& v : t.data()) v = fill;
  p.t.emplace(name, t);
}

void add_attention(ModelParams& p, const std::string& prefix, int d,
                   std::mt19937_64& rng) {
  add_matrix(p, prefix + ".wq", d, d, rng);
  add_matrix(p, prefix + ".wk", d, d, rng);
  add_matrix(p, prefix + ".wv", d, d, rng);
  add_matrix(p, prefix + ".wo", d, d, rng);
}

void add_norm(ModelParams& p, const std::string& prefix, int d) {
  add_vector(p, prefix + "_g", d, 1.0);
  add_vector(p, prefix + "_b", d, 0.0);
}

void add_ffn(ModelParams& p, const std::string& prefix, int d, int d_mlp,
             std::mt19937_64& rng) {
  add_matrix(p, prefix + ".ff1", d, d_mlp, rng);
  add_vector(p, prefix + ".ff1_b", d_mlp, 0.0);
  add_matrix(p, prefix + ".ff2", d_mlp, d, rng);
  add_vector(p, prefix + ".ff2_b", d, 0.0);
}

void add_encoder_stack(ModelParams& p, const std::string& stack, int layers,
                       const ModelConfig& cfg, std::mt19937_64& rng) {
  for (int l = 0; l < layers; ++l) {
    const std::string pre = stack + "." + std::to_string(l);
    add_attention(p, pre + ".self", cfg.d_h, rng);
    add_norm(p, pre + ".ln1", cfg.d_h);
    add_ffn(p, pre, cfg.d_h, cfg.d_mlp, rng);
    add_norm(p, pre + ".ln2", cfg.d_h);
  }
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  if (cfg.vocab_words <= 0 || cfg.vocab_phonemes <= 0) {
    throw std::invalid_argument("init_params: vocab sizes not set in config");
  }
  std::mt19937_64 rng(mix_seed(seed, 0x70617263));
  ModelParams p;
  add_matrix(p, "tok_emb", cfg.vocab_words, cfg.d_h, rng);
  add_matrix(p, "phon_emb", cfg.vocab_phonemes, cfg.d_h, rng);
  add_encoder_stack(p, "enc_w", cfg.n_layers_text, cfg, rng);
  add_encoder_stack(p, "enc_p", cfg.n_layers_phon, cfg, rng);
  for (int b = 0; b < cfg.n_cross_blocks; ++b) {
    const std::string pre = "fuse." + std::to_string(b);
    add_attention(p, pre, cfg.d_h, rng);
    add_norm(p, pre + ".ln", cfg.d_h);
  }
  for (int l = 0; l < cfg.n_conv_tagp; ++l) {
    const std::string pre = "tagp.conv" + std::to_string(l);
    add_matrix(p, pre + ".w", cfg.d_h, cfg.conv_kernel * cfg.d_h, rng);
    add_vector(p, pre + ".b", cfg.d_h, 0.0);
    add_norm(p, pre + ".ln", cfg.d_h);
  }
  for (int l = 0; l < cfg.n_mlp_tagp; ++l) {
    const std::string pre = "tagp.mlp" + std::to_string(l);
    const bool last = l == cfg.n_mlp_tagp - 1;
    add_matrix(p, pre + ".w", cfg.d_h, last ? 1 : cfg.d_h, rng);
    add_vector(p, pre + ".b", last ? 1 : cfg.d_h, 0.0);
  }
  for (int l = 0; l < cfg.n_layers_dec; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    add_attention(p, pre + ".self", cfg.d_h, rng);
    add_norm(p, pre + ".ln1", cfg.d_h);
    add_attention(p, pre + ".txt", cfg.d_h, rng);
    add_norm(p, pre + ".ln2", cfg.d_h);
    add_attention(p, pre + ".phon", cfg.d_h, rng);
    add_norm(p, pre + ".ln3", cfg.d_h);
    add_ffn(p, pre, cfg.d_h, cfg.d_mlp, rng);
    add_norm(p, pre + ".ln4", cfg.d_h);
  }
  add_matrix(p, "out_proj", cfg.d_h, cfg.vocab_words, rng);
  add_vector(p, "out_b", cfg.vocab_words, 0.0);
  return p;
}

Tensor positional_encoding(int len, int d) {
  Tensor pe({len, d});
  for (int pos = 0; pos < len; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
      pe.data()[static_cast<size_t>(pos) * d + i] = std::sin(angle);
      if (i + 1 < d)
        pe.data()[static_cast<size_t>(pos) * d + i + 1] = std::cos(angle);
    }
  }
  return pe;
}

namespace {

Tensor apply_dropout(ForwardCtx& ctx, const Tensor& x) {
  if (!ctx.training || ctx.cfg.dropout <= 0.0) return x;
  if (!ctx.rng) {
    throw std::logic_error("training forward pass without a dropout rng");
  }
  return ctx.g.dropout(x, ctx.cfg.dropout, *ctx.rng, true);
}

Tensor residual_norm(ForwardCtx& ctx, const Tensor& x, const Tensor& y,
                     const std::string& ln_prefix) {
  Tensor summed = ctx.g.add(x, apply_dropout(ctx, y));
  return ctx.g.layer_norm(summed, ctx.params.at(ln_prefix + "_g"),
                          ctx.params.at(ln_prefix + "_b"));
}

// Multi-head attention with q_in as query and kv as key/value source.
Tensor mha(ForwardCtx& ctx, const Tensor& q_in, const Tensor& kv,
           const std::string& prefix, const Tensor* score_mask = nullptr) {
  Graph& g = ctx.g;
  const int d = ctx.cfg.d_h;
  const int heads = ctx.cfg.n_heads;
  const int dk = d / heads;
  Tensor q = g.matmul(q_in, ctx.params.at(prefix + ".wq"));
  Tensor k = g.matmul(kv, ctx.params.at(prefix + ".wk"));
  Tensor v = g.matmul(kv, ctx.params.at(prefix + ".wv"));
  std::vector<Tensor> contexts;
  contexts.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Tensor qh = g.slice_cols(q, h * dk, (h + 1) * dk);
    Tensor kh = g.slice_cols(k, h * dk, (h + 1) * dk);
    Tensor vh = g.slice_cols(v, h * dk, (h + 1) * dk);
    Tensor scores = g.scale(g.matmul_nt(qh, kh), 1.0 / std::sqrt(dk));
    if (score_mask) scores = g.add(scores, *score_mask);
    Tensor weights = g.softmax_rows(scores);
    if (ctx.trace) ctx.trace->attention.push_back(weights);
    contexts.push_back(g.matmul(weights, vh));
  }
  Tensor merged = heads == 1 ? contexts[0] : g.concat_cols(contexts);
  return g.matmul(merged, ctx.params.at(prefix + ".wo"));
}

Tensor ffn(ForwardCtx& ctx, const Tensor& x, const std::string& prefix) {
  Graph& g = ctx.g;
  Tensor h = g.relu(g.add_bias(g.matmul(x, ctx.params.at(prefix + ".ff1")),
                               ctx.params.at(prefix + ".ff1_b")));
  h = apply_dropout(ctx, h);
  return g.add_bias(g.matmul(h, ctx.params.at(prefix + ".ff2")),
                    ctx.params.at(prefix + ".ff2_b"));
}

Tensor embed_with_positions(ForwardCtx& ctx, const Tensor& table,
                            const std::vector<int>& ids) {
  if (ids.empty()) {
    throw std::invalid_argument("encode: empty input sequence");
  }
  if (static_cast<int>(ids.size()) > ctx.cfg.max_seq_len) {
    throw std::invalid_argument(
        "sequence length " + std::to_string(ids.size()) +
        " exceeds positional table (" + std::to_string(ctx.cfg.max_seq_len) +
        ")");
  }
  Graph& g = ctx.g;
  Tensor x = g.scale(g.embed(table, ids), std::sqrt(ctx.cfg.d_h));
  x = g.add(x, positional_encoding(static_cast<int>(ids.size()), ctx.cfg.d_h));
  return apply_dropout(ctx, x);
}

Tensor encoder_stack(ForwardCtx& ctx, Tensor x, const std::string& stack,
                     int layers) {
  for (int l = 0; l < layers; ++l) {
    const std::string pre = stack + "." + std::to_string(l);
    x = residual_norm(ctx, x, mha(ctx, x, x, pre + ".self"), pre + ".ln1");
    x = residual_norm(ctx, x, ffn(ctx, x, pre), pre + ".ln2");
  }
  return x;
}

}  // namespace

EncoderOut encode(ForwardCtx& ctx, const std::vector<int>& word_ids,
                  const std::vector<int>& phoneme_ids) {
  EncoderOut out;
  Tensor xw = embed_with_positions(ctx, ctx.params.at("tok_emb"), word_ids);
  out.h_w = encoder_stack(ctx, xw, "enc_w", ctx.cfg.n_layers_text);
  Tensor xp = embed_with_positions(ctx, ctx.params.at("phon_emb"), phoneme_ids);
  out.h_p = encoder_stack(ctx, xp, "enc_p", ctx.cfg.n_layers_phon);
  return out;
}

Tensor fuse_concat(Graph& g, const Tensor& h_w, const Tensor& h_p) {
  return g.concat_rows(h_w, h_p);
}

Tensor fuse_pool(Graph& g, const Tensor& h_w, const Tensor& h_p, PoolMode mode) {
  const int n = h_w.rows(), m = h_p.rows(), d = h_w.cols();
  if (m < n) {
    throw std::invalid_argument(
        "fuse_pool: phoneme length m=" + std::to_string(m) +
        " shorter than text length n=" + std::to_string(n));
  }
  if (h_p.cols() != d) {
    throw std::invalid_argument("fuse_pool: hidden size mismatch " +
                                h_w.shape_str() + " vs " + h_p.shape_str());
  }
  Tensor padded = h_w;
  if (m > n) {
    padded = g.concat_rows(h_w, Tensor::zeros({m - n, d}));
  }
  if (mode == PoolMode::Add) return g.add(padded, h_p);
  // elementwise max via relu identity: max(a,b) = a + relu(b - a)
  return g.add(padded, g.relu(g.sub(h_p, padded)));
}

Tensor fuse_cross(ForwardCtx& ctx, const Tensor& h_w, const Tensor& h_p) {
  Tensor x = h_w;
  for (int b = 0; b < ctx.cfg.n_cross_blocks; ++b) {
    const std::string pre = "fuse." + std::to_string(b);
    x = residual_norm(ctx, x, mha(ctx, x, h_p, pre), pre + ".ln");
  }
  return x;
}

Tensor fuse(ForwardCtx& ctx, const EncoderOut& enc) {
  switch (ctx.cfg.fusion) {
    case Fusion::Concat: return fuse_concat(ctx.g, enc.h_w, enc.h_p);
    case Fusion::Add: return fuse_pool(ctx.g, enc.h_w, enc.h_p, PoolMode::Add);
    case Fusion::Max: return fuse_pool(ctx.g, enc.h_w, enc.h_p, PoolMode::Max);
    case Fusion::CrossAtten: return fuse_cross(ctx, enc.h_w, enc.h_p);
  }
  throw std::logic_error("fuse: unreachable");
}

Tensor tag_predict(ForwardCtx& ctx, const Tensor& h_s, int n) {
  Graph& g = ctx.g;
  Tensor x = h_s;
  for (int l = 0; l < ctx.cfg.n_conv_tagp; ++l) {
    const std::string pre = "tagp.conv" + std::to_string(l);
    x = g.conv1d_same(x, ctx.params.at(pre + ".w"), ctx.params.at(pre + ".b"),
                      ctx.cfg.conv_kernel);
    x = g.relu(x);
    x = g.layer_norm(x, ctx.params.at(pre + ".ln_g"),
                     ctx.params.at(pre + ".ln_b"));
    x = apply_dropout(ctx, x);
  }
  for (int l = 0; l < ctx.cfg.n_mlp_tagp; ++l) {
    const std::string pre = "tagp.mlp" + std::to_string(l);
    x = g.add_bias(g.matmul(x, ctx.params.at(pre + ".w")),
                   ctx.params.at(pre + ".b"));
    if (l + 1 < ctx.cfg.n_mlp_tagp) x = g.relu(x);
  }
  // intermediate output runs over the fused length; keep the first n
  if (x.rows() < n) {
    throw std::logic_error("tag_predict: fused length shorter than n");
  }
  return x.rows() == n ? x : g.slice_rows(x, 0, n);
}

Tensor decode(ForwardCtx& ctx, const std::vector<int>& adjusted_ids,
              const Tensor& h_w, const Tensor& h_p, bool causal_mask) {
  if (adjusted_ids.empty()) {
    throw std::invalid_argument("decode: empty adjusted source");
  }
  Graph& g = ctx.g;
  if (ctx.stats) ++ctx.stats->decoder_passes;
  const int len = static_cast<int>(adjusted_ids.size());
  Tensor mask;
  if (causal_mask) {
    mask = Tensor::zeros({len, len});
    for (int i = 0; i < len; ++i)
      for (int j = i + 1; j < len; ++j)
        mask.data()[static_cast<size_t>(i) * len + j] = -1e9;
  }
  Tensor x = embed_with_positions(ctx, ctx.params.at("tok_emb"), adjusted_ids);
  for (int l = 0; l < ctx.cfg.n_layers_dec; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    x = residual_norm(
        ctx, x,
        mha(ctx, x, x, pre + ".self", causal_mask ? &mask : nullptr),
        pre + ".ln1");
    x = residual_norm(ctx, x, mha(ctx, x, h_w, pre + ".txt"), pre + ".ln2");
    x = residual_norm(ctx, x, mha(ctx, x, h_p, pre + ".phon"), pre + ".ln3");
    x = residual_norm(ctx, x, ffn(ctx, x, pre), pre + ".ln4");
  }
  return g.add_bias(g.matmul(x, ctx.params.at("out_proj")),
                    ctx.params.at("out_b"));
}

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"d_h", c.d_h},
              {"n_layers_text", c.n_layers_text},
              {"n_layers_phon", c.n_layers_phon},
              {"n_layers_dec", c.n_layers_dec},
              {"n_heads", c.n_heads},
              {"d_mlp", c.d_mlp},
              {"n_conv_tagp", c.n_conv_tagp},
              {"conv_kernel", c.conv_kernel},
              {"n_mlp_tagp", c.n_mlp_tagp},
              {"n_cross_blocks", c.n_cross_blocks},
              {"dropout", c.dropout},
              {"fusion", fusion_name(c.fusion)},
              {"max_tag_magnitude", c.max_tag_magnitude},
              {"max_seq_len", c.max_seq_len},
              {"vocab_words", c.vocab_words},
              {"vocab_phonemes", c.vocab_phonemes}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d_h = j.at("d_h");
  c.n_layers_text = j.at("n_layers_text");
  c.n_layers_phon = j.at("n_layers_phon");
  c.n_layers_dec = j.at("n_layers_dec");
  c.n_heads = j.at("n_heads");
  c.d_mlp = j.at("d_mlp");
  c.n_conv_tagp = j.at("n_conv_tagp");
  c.conv_kernel = j.at("conv_kernel");
  c.n_mlp_tagp = j.at("n_mlp_tagp");
  c.n_cross_blocks = j.at("n_cross_blocks");
  c.dropout = j.at("dropout");
  c.fusion = fusion_from_name(j.at("fusion"));
  c.max_tag_magnitude = j.at("max_tag_magnitude");
  c.max_seq_len = j.at("max_seq_len");
  c.vocab_words = j.at("vocab_words");
  c.vocab_phonemes = j.at("vocab_phonemes");
  return c;
}

constexpr char kMagic[] = "PATC1";

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& cfg, uint64_t word_vocab_hash,
                     uint64_t phoneme_vocab_hash) {
  json manifest;
  manifest["config"] = config_to_json(cfg);
  manifest["word_vocab_hash"] = word_vocab_hash;
  manifest["phoneme_vocab_hash"] = phoneme_vocab_hash;
  json plist = json::array();
  uint64_t offset = 0;
  for (const auto& [name, tensor] : params.t) {
    plist.push_back(
        {{"name", name}, {"shape", tensor.shape()}, {"offset", offset}});
    offset += tensor.size();
  }
  manifest["params"] = plist;
  const std::string mstr = manifest.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  f.write(kMagic, 5);
  const uint64_t mlen = mstr.size();
  f.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
  f.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  for (const auto& [name, tensor] : params.t) {
    f.write(reinterpret_cast<const char*>(tensor.data().data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!f) throw std::runtime_error("short write to checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  char magic[5];
  f.read(magic, 5);
  if (!f || std::memcmp(magic, kMagic, 5) != 0) {
    throw std::runtime_error(path + " is not a PATC1 checkpoint");
  }
  uint64_t mlen = 0;
  f.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
  std::string mstr(mlen, '\0');
  f.read(mstr.data(), static_cast<std::streamsize>(mlen));
  if (!f) throw std::runtime_error("truncated checkpoint manifest in " + path);
  const json manifest = json::parse(mstr);

  Checkpoint ckpt;
  ckpt.cfg = config_from_json(manifest.at("config"));
  ckpt.word_vocab_hash = manifest.at("word_vocab_hash");
  ckpt.phoneme_vocab_hash = manifest.at("phoneme_vocab_hash");
  for (const auto& entry : manifest.at("params")) {
    const std::string name = entry.at("name");
    const std::vector<int> shape = entry.at("shape");
    Tensor t(shape, true);
    f.read(reinterpret_cast<char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!f) throw std::runtime_error("truncated checkpoint blob in " + path);
    ckpt.params.t.emplace(name, t);
  }
  return ckpt;
}

}  // namespace patc::model
