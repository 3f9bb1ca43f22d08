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

#include "patc/tensor.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "patc/kernels.hpp"

namespace patc {

namespace {

size_t shape_product(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimension must be positive");
    n *= static_cast<size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, bool requires_grad) {
  d_ = std::make_shared<TensorData>();
  d_->shape = std::move(shape);
  d_->data.assign(shape_product(d_->shape), 0.0);
  d_->requires_grad = requires_grad;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values,
                    bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  if (values.size() != t.size()) {
    throw std::invalid_argument("tensor data length does not match shape " +
                                t.shape_str());
  }
  t.d_->data = std::move(values);
  return t;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return Tensor(std::move(shape), requires_grad);
}

int Tensor::rows() const {
  return d_->shape.size() == 1 ? 1 : d_->shape[0];
}

int Tensor::cols() const {
  return d_->shape.empty() ? 1 : d_->shape.back();
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::logic_error("item() on non-scalar tensor " + shape_str());
  }
  return d_->data[0];
}

Tensor Tensor::clone() const {
  Tensor t;
  t.d_ = std::make_shared<TensorData>(*d_);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < d_->shape.size(); ++i) {
    if (i) os << 'x';
    os << d_->shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Graph::make_output(std::vector<int> shape, bool needs) {
  Tensor out(std::move(shape), needs);
  produced_.insert(out.node());
  keep_alive_.push_back(out.holder());
  return out;
}

bool Graph::needs_grad(const Tensor& t) const { return t.requires_grad(); }

std::vector<double>& Graph::gslot(const Tensor& t) {
  auto it = grads_.find(t.node());
  if (it == grads_.end()) {
    it = grads_.emplace(t.node(), std::vector<double>(t.size(), 0.0)).first;
  }
  return it->second;
}

const std::vector<double>& Graph::grad_of(const Tensor& t) const {
  auto it = grads_.find(t.node());
  if (it == grads_.end()) return empty_grad_;
  return it->second;
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  const int r = a.rows(), k = a.cols(), k2 = b.rows(), c = b.cols();
  if (k != k2) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " +
                                a.shape_str() + " vs " + b.shape_str());
  }
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output({r, c}, na || nb);
  kernels::matmul(a.data().data(), b.data().data(), out.data().data(), r, k, c,
                  kernels::Layout::NN, false);
  if (na || nb) {
    tape_.push_back({[a, b, out, r, k, c, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        kernels::matmul(go.data(), b.data().data(), g.gslot(a).data(), r, c, k,
                        kernels::Layout::NT, true);
      }
      if (nb) {
        kernels::matmul(a.data().data(), go.data(), g.gslot(b).data(), k, r, c,
                        kernels::Layout::TN, true);
      }
    }});
  }
  return out;
}

Tensor Graph::matmul_nt(const Tensor& a, const Tensor& b) {
  const int r = a.rows(), k = a.cols(), c = b.rows();
  if (k != b.cols()) {
    throw std::invalid_argument("matmul_nt: inner dimensions disagree: " +
                                a.shape_str() + " vs " + b.shape_str());
  }
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output({r, c}, na || nb);
  kernels::matmul(a.data().data(), b.data().data(), out.data().data(), r, k, c,
                  kernels::Layout::NT, false);
  if (na || nb) {
    tape_.push_back({[a, b, out, r, k, c, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        // dA += G * B
        kernels::matmul(go.data(), b.data().data(), g.gslot(a).data(), r, c, k,
                        kernels::Layout::NN, true);
      }
      if (nb) {
        // dB += G^T * A
        kernels::matmul(go.data(), a.data().data(), g.gslot(b).data(), c, r, k,
                        kernels::Layout::TN, true);
      }
    }});
  }
  return out;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("add: shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output(a.shape(), na || nb);
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  if (na || nb) {
    tape_.push_back({[a, b, out, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        auto& ga = g.gslot(a);
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (nb) {
        auto& gb = g.gslot(b);
        for (size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
      }
    }});
  }
  return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("sub: shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output(a.shape(), na || nb);
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  if (na || nb) {
    tape_.push_back({[a, b, out, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        auto& ga = g.gslot(a);
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
      }
      if (nb) {
        auto& gb = g.gslot(b);
        for (size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
      }
    }});
  }
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("mul: shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output(a.shape(), na || nb);
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (na || nb) {
    tape_.push_back({[a, b, out, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        auto& ga = g.gslot(a);
        for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * b.data()[i];
      }
      if (nb) {
        auto& gb = g.gslot(b);
        for (size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * a.data()[i];
      }
    }});
  }
  return out;
}

Tensor Graph::scale(const Tensor& a, double c) {
  const bool na = needs_grad(a);
  Tensor out = make_output(a.shape(), na);
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * c;
  if (na) {
    tape_.push_back({[a, out, c](Graph& g) {
      const auto& go = g.gslot(out);
      auto& ga = g.gslot(a);
      for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * c;
    }});
  }
  return out;
}

Tensor Graph::add_bias(const Tensor& x, const Tensor& bias) {
  const int n = x.rows(), d = x.cols();
  if (static_cast<int>(bias.size()) != d) {
    throw std::invalid_argument("add_bias: bias " + bias.shape_str() +
                                " does not match last dim of " + x.shape_str());
  }
  const bool nx = needs_grad(x), nb = needs_grad(bias);
  Tensor out = make_output(x.shape(), nx || nb);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out.data()[i * d + j] = x.data()[i * d + j] + bias.data()[j];
  if (nx || nb) {
    tape_.push_back({[x, bias, out, n, d, nx, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (nx) {
        auto& gx = g.gslot(x);
        for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
      }
      if (nb) {
        auto& gb = g.gslot(bias);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < d; ++j) gb[j] += go[i * d + j];
      }
    }});
  }
  return out;
}

Tensor Graph::relu(const Tensor& x) {
  const bool nx = needs_grad(x);
  Tensor out = make_output(x.shape(), nx);
  for (size_t i = 0; i < x.size(); ++i)
    out.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  if (nx) {
    tape_.push_back({[x, out](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gx = g.gslot(x);
      for (size_t i = 0; i < go.size(); ++i)
        if (x.data()[i] > 0.0) gx[i] += go[i];
    }});
  }
  return out;
}

Tensor Graph::softmax_rows(const Tensor& x) {
  const int n = x.rows(), d = x.cols();
  const bool nx = needs_grad(x);
  Tensor out = make_output(x.shape(), nx);
  for (int i = 0; i < n; ++i) {
    const double* row = x.data().data() + static_cast<size_t>(i) * d;
    double* orow = out.data().data() + static_cast<size_t>(i) * d;
    double mx = row[0];
    for (int j = 1; j < d; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < d; ++j) {
      orow[j] = std::exp(row[j] - mx);
      z += orow[j];
    }
    for (int j = 0; j < d; ++j) orow[j] /= z;
  }
  if (nx) {
    tape_.push_back({[x, out, n, d](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gx = g.gslot(x);
      for (int i = 0; i < n; ++i) {
        const size_t off = static_cast<size_t>(i) * d;
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += go[off + j] * out.data()[off + j];
        for (int j = 0; j < d; ++j)
          gx[off + j] += out.data()[off + j] * (go[off + j] - dot);
      }
    }});
  }
  return out;
}

Tensor Graph::layer_norm(const Tensor& x, const Tensor& gain,
                         const Tensor& bias) {
  const int n = x.rows(), d = x.cols();
  constexpr double kEps = 1e-5;
  if (static_cast<int>(gain.size()) != d || static_cast<int>(bias.size()) != d) {
    throw std::invalid_argument("layer_norm: gain/bias do not match last dim " +
                                x.shape_str());
  }
  const bool nx = needs_grad(x), ng = needs_grad(gain), nb = needs_grad(bias);
  Tensor out = make_output(x.shape(), nx || ng || nb);
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(n);
  for (int i = 0; i < n; ++i) {
    const size_t off = static_cast<size_t>(i) * d;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += x.data()[off + j];
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = x.data()[off + j] - mu;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + kEps);
    (*inv_std)[i] = is;
    for (int j = 0; j < d; ++j) {
      const double h = (x.data()[off + j] - mu) * is;
      (*xhat)[off + j] = h;
      out.data()[off + j] = gain.data()[j] * h + bias.data()[j];
    }
  }
  if (nx || ng || nb) {
    tape_.push_back({[x, gain, bias, out, xhat, inv_std, n, d, nx, ng,
                      nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (ng) {
        auto& gg = g.gslot(gain);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < d; ++j)
            gg[j] += go[static_cast<size_t>(i) * d + j] *
                     (*xhat)[static_cast<size_t>(i) * d + j];
      }
      if (nb) {
        auto& gb = g.gslot(bias);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < d; ++j) gb[j] += go[static_cast<size_t>(i) * d + j];
      }
      if (nx) {
        auto& gx = g.gslot(x);
        for (int i = 0; i < n; ++i) {
          const size_t off = static_cast<size_t>(i) * d;
          double sum_gh = 0.0, sum_ghx = 0.0;
          for (int j = 0; j < d; ++j) {
            const double gh = go[off + j] * gain.data()[j];
            sum_gh += gh;
            sum_ghx += gh * (*xhat)[off + j];
          }
          for (int j = 0; j < d; ++j) {
            const double gh = go[off + j] * gain.data()[j];
            gx[off + j] += (*inv_std)[i] *
                           (gh - sum_gh / d - (*xhat)[off + j] * sum_ghx / d);
          }
        }
      }
    }});
  }
  return out;
}

Tensor Graph::concat_rows(const Tensor& a, const Tensor& b) {
  const int d = a.cols();
  if (b.cols() != d) {
    throw std::invalid_argument("concat_rows: column mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  const int ra = a.rows(), rb = b.rows();
  const bool na = needs_grad(a), nb = needs_grad(b);
  Tensor out = make_output({ra + rb, d}, na || nb);
  std::memcpy(out.data().data(), a.data().data(), a.size() * sizeof(double));
  std::memcpy(out.data().data() + a.size(), b.data().data(),
              b.size() * sizeof(double));
  if (na || nb) {
    tape_.push_back({[a, b, out, na, nb](Graph& g) {
      const auto& go = g.gslot(out);
      if (na) {
        auto& ga = g.gslot(a);
        for (size_t i = 0; i < a.size(); ++i) ga[i] += go[i];
      }
      if (nb) {
        auto& gb = g.gslot(b);
        for (size_t i = 0; i < b.size(); ++i) gb[i] += go[a.size() + i];
      }
    }});
  }
  return out;
}

Tensor Graph::slice_rows(const Tensor& x, int r0, int r1) {
  const int n = x.rows(), d = x.cols();
  if (r0 < 0 || r1 > n || r0 >= r1) {
    throw std::invalid_argument("slice_rows: bad range on " + x.shape_str());
  }
  const bool nx = needs_grad(x);
  Tensor out = make_output({r1 - r0, d}, nx);
  std::memcpy(out.data().data(), x.data().data() + static_cast<size_t>(r0) * d,
              out.size() * sizeof(double));
  if (nx) {
    tape_.push_back({[x, out, r0, d](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gx = g.gslot(x);
      for (size_t i = 0; i < go.size(); ++i)
        gx[static_cast<size_t>(r0) * d + i] += go[i];
    }});
  }
  return out;
}

Tensor Graph::slice_cols(const Tensor& x, int c0, int c1) {
  const int n = x.rows(), d = x.cols();
  if (c0 < 0 || c1 > d || c0 >= c1) {
    throw std::invalid_argument("slice_cols: bad range on " + x.shape_str());
  }
  const int w = c1 - c0;
  const bool nx = needs_grad(x);
  Tensor out = make_output({n, w}, nx);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < w; ++j)
      out.data()[static_cast<size_t>(i) * w + j] =
          x.data()[static_cast<size_t>(i) * d + c0 + j];
  if (nx) {
    tape_.push_back({[x, out, c0, d, w, n](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gx = g.gslot(x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j)
          gx[static_cast<size_t>(i) * d + c0 + j] +=
              go[static_cast<size_t>(i) * w + j];
    }});
  }
  return out;
}

Tensor Graph::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int n = parts[0].rows();
  int d = 0;
  bool needs = false;
  for (const auto& p : parts) {
    if (p.rows() != n) {
      throw std::invalid_argument("concat_cols: row mismatch " +
                                  parts[0].shape_str() + " vs " + p.shape_str());
    }
    d += p.cols();
    needs = needs || needs_grad(p);
  }
  Tensor out = make_output({n, d}, needs);
  int c0 = 0;
  for (const auto& p : parts) {
    const int w = p.cols();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j)
        out.data()[static_cast<size_t>(i) * d + c0 + j] =
            p.data()[static_cast<size_t>(i) * w + j];
    c0 += w;
  }
  if (needs) {
    tape_.push_back({[parts, out, n, d](Graph& g) {
      const auto& go = g.gslot(out);
      int c0 = 0;
      for (const auto& p : parts) {
        const int w = p.cols();
        if (p.requires_grad()) {
          auto& gp = g.gslot(p);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j)
              gp[static_cast<size_t>(i) * w + j] +=
                  go[static_cast<size_t>(i) * d + c0 + j];
        }
        c0 += w;
      }
    }});
  }
  return out;
}

Tensor Graph::embed(const Tensor& table, const std::vector<int>& ids) {
  const int v = table.rows(), d = table.cols();
  for (int id : ids) {
    if (id < 0 || id >= v) {
      throw std::out_of_range("embed: id " + std::to_string(id) +
                              " outside table " + table.shape_str());
    }
  }
  const bool nt = needs_grad(table);
  Tensor out = make_output({static_cast<int>(ids.size()), d}, nt);
  for (size_t i = 0; i < ids.size(); ++i)
    std::memcpy(out.data().data() + i * d,
                table.data().data() + static_cast<size_t>(ids[i]) * d,
                static_cast<size_t>(d) * sizeof(double));
  if (nt) {
    tape_.push_back({[table, out, ids, d](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gt = g.gslot(table);
      for (size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j)
          gt[static_cast<size_t>(ids[i]) * d + j] += go[i * d + j];
    }});
  }
  return out;
}

Tensor Graph::conv1d_same(const Tensor& x, const Tensor& weight,
                          const Tensor& bias, int kernel) {
  const int n = x.rows(), din = x.cols();
  const int dout = weight.rows();
  if (kernel % 2 == 0) {
    throw std::invalid_argument("conv1d_same: kernel width must be odd");
  }
  if (weight.cols() != kernel * din || static_cast<int>(bias.size()) != dout) {
    throw std::invalid_argument("conv1d_same: weight " + weight.shape_str() +
                                " does not match input " + x.shape_str());
  }
  const int pad = (kernel - 1) / 2;
  const bool nx = needs_grad(x), nw = needs_grad(weight), nb = needs_grad(bias);
  Tensor out = make_output({n, dout}, nx || nw || nb);
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < dout; ++o) {
      double acc = bias.data()[o];
      const double* wrow =
          weight.data().data() + static_cast<size_t>(o) * kernel * din;
      for (int t = 0; t < kernel; ++t) {
        const int src = i + t - pad;
        if (src < 0 || src >= n) continue;
        const double* xrow = x.data().data() + static_cast<size_t>(src) * din;
        const double* wseg = wrow + static_cast<size_t>(t) * din;
        for (int j = 0; j < din; ++j) acc += wseg[j] * xrow[j];
      }
      out.data()[static_cast<size_t>(i) * dout + o] = acc;
    }
  }
  if (nx || nw || nb) {
    tape_.push_back({[x, weight, bias, out, kernel, pad, n, din, dout, nx, nw,
                      nb](Graph& g) {
      const auto& go = g.gslot(out);
      auto* gx = nx ? &g.gslot(x) : nullptr;
      auto* gw = nw ? &g.gslot(weight) : nullptr;
      auto* gb = nb ? &g.gslot(bias) : nullptr;
      for (int i = 0; i < n; ++i) {
        for (int o = 0; o < dout; ++o) {
          const double gout = go[static_cast<size_t>(i) * dout + o];
          if (gout == 0.0) continue;
          if (gb) (*gb)[o] += gout;
          const size_t woff = static_cast<size_t>(o) * kernel * din;
          for (int t = 0; t < kernel; ++t) {
            const int src = i + t - pad;
            if (src < 0 || src >= n) continue;
            for (int j = 0; j < din; ++j) {
              const size_t wi = woff + static_cast<size_t>(t) * din + j;
              const size_t xi = static_cast<size_t>(src) * din + j;
              if (gw) (*gw)[wi] += gout * x.data()[xi];
              if (gx) (*gx)[xi] += gout * weight.data()[wi];
            }
          }
        }
      }
    }});
  }
  return out;
}

Tensor Graph::dropout(const Tensor& x, double p, std::mt19937_64& rng,
                      bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
  const double keep = 1.0 - p;
  auto mask = std::make_shared<std::vector<double>>(x.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& m : *mask) m = u(rng) < keep ? 1.0 / keep : 0.0;
  const bool nx = needs_grad(x);
  Tensor out = make_output(x.shape(), nx);
  for (size_t i = 0; i < x.size(); ++i) out.data()[i] = x.data()[i] * (*mask)[i];
  if (nx) {
    tape_.push_back({[x, out, mask](Graph& g) {
      const auto& go = g.gslot(out);
      auto& gx = g.gslot(x);
      for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * (*mask)[i];
    }});
  }
  return out;
}

Tensor Graph::sum(const Tensor& x) {
  const bool nx = needs_grad(x);
  Tensor out = make_output({1}, nx);
  out.data()[0] = std::accumulate(x.data().begin(), x.data().end(), 0.0);
  if (nx) {
    tape_.push_back({[x, out](Graph& g) {
      const double go = g.gslot(out)[0];
      auto& gx = g.gslot(x);
      for (auto& v : gx) v += go;
    }});
  }
  return out;
}

Tensor Graph::mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor Graph::cross_entropy_ls(const Tensor& logits,
                               const std::vector<int>& targets,
                               double smoothing) {
  const int n = logits.rows(), v = logits.cols();
  if (static_cast<int>(targets.size()) != n) {
    throw std::invalid_argument("cross_entropy_ls: " + std::to_string(n) +
                                " rows vs " + std::to_string(targets.size()) +
                                " targets");
  }
  if (smoothing < 0.0 || smoothing >= 1.0) {
    throw std::invalid_argument("cross_entropy_ls: smoothing outside [0,1)");
  }
  auto probs = std::make_shared<std::vector<double>>(logits.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const size_t off = static_cast<size_t>(i) * v;
    const double* row = logits.data().data() + off;
    double mx = row[0];
    for (int j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < v; ++j) {
      (*probs)[off + j] = std::exp(row[j] - mx);
      z += (*probs)[off + j];
    }
    const double logz = std::log(z) + mx;
    double row_loss = 0.0;
    const double uni = smoothing / v;
    for (int j = 0; j < v; ++j) {
      (*probs)[off + j] /= z;
      double q = uni + (j == targets[i] ? 1.0 - smoothing : 0.0);
      if (q > 0.0) row_loss -= q * (row[j] - logz);
    }
    total += row_loss;
  }
  const bool nl = needs_grad(logits);
  Tensor out = make_output({1}, nl);
  out.data()[0] = total / n;
  if (nl) {
    tape_.push_back({[logits, out, probs, targets, smoothing, n, v](Graph& g) {
      const double go = g.gslot(out)[0] / n;
      auto& gl = g.gslot(logits);
      const double uni = smoothing / v;
      for (int i = 0; i < n; ++i) {
        const size_t off = static_cast<size_t>(i) * v;
        for (int j = 0; j < v; ++j) {
          const double q = uni + (j == targets[i] ? 1.0 - smoothing : 0.0);
          gl[off + j] += go * ((*probs)[off + j] - q);
        }
      }
    }});
  }
  return out;
}

Tensor Graph::mse(const Tensor& pred, const std::vector<double>& target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("mse: prediction " + pred.shape_str() +
                                " vs target length " +
                                std::to_string(target.size()));
  }
  const size_t n = pred.size();
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = pred.data()[i] - target[i];
    total += d * d;
  }
  const bool np = needs_grad(pred);
  Tensor out = make_output({1}, np);
  out.data()[0] = total / static_cast<double>(n);
  if (np) {
    tape_.push_back({[pred, out, target, n](Graph& g) {
      const double go = g.gslot(out)[0] * 2.0 / static_cast<double>(n);
      auto& gp = g.gslot(pred);
      for (size_t i = 0; i < n; ++i)
        gp[i] += go * (pred.data()[i] - target[i]);
    }});
  }
  return out;
}

void Graph::backward(const Tensor& loss, bool write_tensor_grads) {
  if (backward_done_) {
    throw std::logic_error(
        "backward already ran on this graph; re-run the forward pass first");
  }
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                loss.shape_str());
  }
  backward_done_ = true;
  gslot(loss)[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) it->back(*this);
  if (write_tensor_grads) {
    for (auto& [node, g] : grads_) {
      if (node->requires_grad) node->grad = g;
    }
  }
}

double grad_check(const std::function<Tensor(Graph&)>& forward,
                  const std::vector<Tensor>& params, double step) {
  auto eval = [&]() {
    Graph g;
    Tensor loss = forward(g);
    const double v = loss.item();
    if (!std::isfinite(v)) {
      throw std::runtime_error("grad_check: non-finite loss " +
                               std::to_string(v));
    }
    return v;
  };
  Graph g;
  Tensor loss = forward(g);
  if (!std::isfinite(loss.item())) {
    throw std::runtime_error("grad_check: non-finite loss at base point");
  }
  g.backward(loss, false);
  double max_rel = 0.0;
  for (const auto& p : params) {
    const auto& ad = g.grad_of(p);
    for (size_t i = 0; i < p.size(); ++i) {
      const double g_ad = i < ad.size() ? ad[i] : 0.0;
      double& slot = const_cast<Tensor&>(p).data()[i];
      const double saved = slot;
      slot = saved + step;
      const double lp = eval();
      slot = saved - step;
      const double lm = eval();
      slot = saved;
      const double g_fd = (lp - lm) / (2.0 * step);
      const double rel =
          std::abs(g_ad - g_fd) / (std::abs(g_ad) + std::abs(g_fd) + 1e-12);
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void xavier_init(Tensor& t, int fan_in, int fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (auto& v : t.data()) v = u(rng);
}

}  // namespace patc
