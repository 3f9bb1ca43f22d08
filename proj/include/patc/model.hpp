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

#ifndef PATC_MODEL_HPP
#define PATC_MODEL_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "patc/tensor.hpp"

namespace patc::model {

enum class Fusion { Concat, Add, Max, CrossAtten };

std::string fusion_name(Fusion f);
Fusion fusion_from_name(const std::string& name);

struct ModelConfig {
  int d_h = 64;
  int n_layers_text = 2;
  int n_layers_phon = 2;
  int n_layers_dec = 2;
  int n_heads = 4;
  int d_mlp = 128;
  int n_conv_tagp = 5;
  int conv_kernel = 3;
  int n_mlp_tagp = 2;
  int n_cross_blocks = 2;
  double dropout = 0.1;
  Fusion fusion = Fusion::CrossAtten;
  int max_tag_magnitude = 4;
  int max_seq_len = 512;
  int vocab_words = 0;     // filled when parameters are created
  int vocab_phonemes = 0;

  void validate() const;  // d_h % n_heads == 0, odd kernel, ...
};

// The published configuration; desk runs default to the smaller one above.
ModelConfig paper_config();

// Named parameter collection. The ordered map gives a stable serialization
// and iteration order.
struct ModelParams {
  std::map<std::string, Tensor> t;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  size_t param_count() const;
  std::vector<Tensor> all() const;
  ModelParams clone() const;
};

ModelParams init_params(const ModelConfig& cfg, uint64_t seed);

struct EncoderOut {
  Tensor h_w;  // [n x d_h]
  Tensor h_p;  // [m x d_h]
};

struct ForwardTrace {
  std::vector<Tensor> attention;  // every softmaxed attention weight matrix
};

struct ForwardStats {
  long decoder_passes = 0;
};

struct ForwardCtx {
  Graph& g;
  const ModelParams& params;
  const ModelConfig& cfg;
  bool training = false;
  std::mt19937_64* rng = nullptr;  // dropout source, required when training
  ForwardTrace* trace = nullptr;
  ForwardStats* stats = nullptr;
};

// Fixed sinusoidal positions; throws past cfg.max_seq_len.
Tensor positional_encoding(int len, int d);

EncoderOut encode(ForwardCtx& ctx, const std::vector<int>& word_ids,
                  const std::vector<int>& phoneme_ids);

Tensor fuse_concat(Graph& g, const Tensor& h_w, const Tensor& h_p);
enum class PoolMode { Add, Max };
Tensor fuse_pool(Graph& g, const Tensor& h_w, const Tensor& h_p, PoolMode mode);
Tensor fuse_cross(ForwardCtx& ctx, const Tensor& h_w, const Tensor& h_p);
// Dispatch on cfg.fusion.
Tensor fuse(ForwardCtx& ctx, const EncoderOut& enc);

// Convolutional stack + MLPs; output cropped to the first n positions for
// concat/pool fusion (cross attention already has n rows).
Tensor tag_predict(ForwardCtx& ctx, const Tensor& h_s, int n);

// Non-autoregressive decoder: one forward pass yields logits for every
// position of the adjusted source. causal_mask exists only for the simulated
// autoregressive latency baseline.
Tensor decode(ForwardCtx& ctx, const std::vector<int>& adjusted_ids,
              const Tensor& h_w, const Tensor& h_p, bool causal_mask = false);

// Checkpoint: "PATC1" magic, JSON manifest, little-endian float64 blob.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelConfig& cfg, uint64_t word_vocab_hash,
                     uint64_t phoneme_vocab_hash);

struct Checkpoint {
  ModelConfig cfg;
  ModelParams params;
  uint64_t word_vocab_hash = 0;
  uint64_t phoneme_vocab_hash = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace patc::model

#endif  // PATC_MODEL_HPP
