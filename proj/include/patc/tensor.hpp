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

#ifndef PATC_TENSOR_HPP
#define PATC_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace patc {

struct TensorData {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // filled after Graph::backward for requires_grad
  bool requires_grad = false;
};

// Value-semantic handle over shared dense storage. Row-major; rank 1 or 2.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  const std::vector<int>& shape() const { return d_->shape; }
  size_t size() const { return d_->data.size(); }
  int rows() const;  // 1 for rank-1 tensors
  int cols() const;  // last dimension
  std::vector<double>& data() { return d_->data; }
  const std::vector<double>& data() const { return d_->data; }
  std::vector<double>& grad() { return d_->grad; }
  const std::vector<double>& grad() const { return d_->grad; }
  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool v) { d_->requires_grad = v; }
  double item() const;  // scalar tensors only
  Tensor clone() const;

  TensorData* node() const { return d_.get(); }
  std::shared_ptr<TensorData> holder() const { return d_; }

  std::string shape_str() const;

 private:
  std::shared_ptr<TensorData> d_;
};

// Reverse-mode tape. One forward pass per graph; backward may run once.
// Gradients accumulate in graph-local buffers so concurrent graphs can share
// read-only parameter tensors; backward() optionally flushes leaf gradients
// into TensorData::grad.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double c);
  Tensor add_bias(const Tensor& x, const Tensor& bias);  // bias over last dim
  Tensor relu(const Tensor& x);
  Tensor softmax_rows(const Tensor& x);
  Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);
  Tensor concat_rows(const Tensor& a, const Tensor& b);
  Tensor slice_rows(const Tensor& x, int r0, int r1);
  Tensor slice_cols(const Tensor& x, int c0, int c1);
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor embed(const Tensor& table, const std::vector<int>& ids);
  // weight is [d_out x (kernel*d_in)], symmetric zero padding keeps length.
  Tensor conv1d_same(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     int kernel);
  Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng,
                 bool training);
  Tensor sum(const Tensor& x);
  Tensor mean(const Tensor& x);
  // Mean over rows of label-smoothed negative log-likelihood.
  Tensor cross_entropy_ls(const Tensor& logits, const std::vector<int>& targets,
                          double smoothing);
  // Mean squared error against a constant target vector.
  Tensor mse(const Tensor& pred, const std::vector<double>& target);

  void backward(const Tensor& loss, bool write_tensor_grads = true);
  bool backward_done() const { return backward_done_; }
  const std::vector<double>& grad_of(const Tensor& t) const;

 private:
  friend class GraphOps;
  Tensor make_output(std::vector<int> shape, bool needs);
  bool needs_grad(const Tensor& t) const;
  std::vector<double>& gslot(const Tensor& t);

  struct Node {
    std::function<void(Graph&)> back;
  };
  std::vector<Node> tape_;
  std::unordered_map<TensorData*, std::vector<double>> grads_;
  std::unordered_set<TensorData*> produced_;
  std::vector<std::shared_ptr<TensorData>> keep_alive_;
  std::vector<double> empty_grad_;
  bool backward_done_ = false;
};

// Max componentwise relative error between reverse-mode gradients and central
// finite differences of a scalar-valued forward function.
//   rel = |g_ad - g_fd| / (|g_ad| + |g_fd| + 1e-12)
double grad_check(const std::function<Tensor(Graph&)>& forward,
                  const std::vector<Tensor>& params, double step = 1e-5);

// Deterministic seed derivation (splitmix64 over the pair).
uint64_t mix_seed(uint64_t seed, uint64_t salt);

// Xavier-uniform fill, seeded.
void xavier_init(Tensor& t, int fan_in, int fan_out, std::mt19937_64& rng);

}  // namespace patc

#endif  // PATC_TENSOR_HPP
