/*
 * Copyright 2026 The zsnas Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "zsnas/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "zsnas/rng.hpp"

namespace zsnas {

std::string FeatureShape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" +
         std::to_string(width);
}

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kAvgPool: return "avgpool";
    case LayerKind::kGlobalAvgPool: return "global_avg_pool";
    case LayerKind::kLinear: return "linear";
    case LayerKind::kSum: return "sum";
  }
  return "?";
}

int conv_output_size(int size, int kernel, int stride, int padding) {
  if (stride <= 0 || kernel <= 0) return 0;
  int span = size + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

FeatureShape Network::output_shape() const {
  return layers_.empty() ? input_ : layers_.back().out;
}

std::size_t Network::relu_units() const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    if (l.kind == LayerKind::kRelu) n += l.out.size();
  return n;
}

// ---------------------------------------------------------------------------
// Builder

NetworkBuilder::NetworkBuilder(FeatureShape input) {
  if (input.channels <= 0 || input.height <= 0 || input.width <= 0)
    fail(ErrorKind::kInvalidArgument, "invalid network input shape " + input.str());
  net_.input_ = input;
}

FeatureShape NetworkBuilder::shape_of(int value) const {
  if (value < 0 || value > last())
    fail(ErrorKind::kInvalidArgument, "unknown value id " + std::to_string(value));
  return value == 0 ? net_.input_ : net_.layers_[value - 1].out;
}

int NetworkBuilder::push(Layer layer) {
  for (const auto& l : net_.layers_)
    if (l.name == layer.name)
      fail(ErrorKind::kInvalidArgument, "duplicate layer name '" + layer.name + "'");
  layer.param_offset = net_.params_.size();
  net_.params_.resize(net_.params_.size() + layer.param_size(), 0.0);
  net_.layers_.push_back(std::move(layer));
  return last();
}

int NetworkBuilder::conv2d(int x, int c_out, int kernel, int stride, int padding,
                           std::string name) {
  Layer l;
  l.kind = LayerKind::kConv2d;
  l.name = std::move(name);
  l.inputs = {x};
  l.in = shape_of(x);
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.out = {c_out, conv_output_size(l.in.height, kernel, stride, padding),
           conv_output_size(l.in.width, kernel, stride, padding)};
  if (c_out <= 0 || l.out.height <= 0 || l.out.width <= 0)
    fail(ErrorKind::kInvalidArgument,
         "layer '" + l.name + "': conv does not fit input " + l.in.str());
  l.weight_count = static_cast<std::size_t>(c_out) * l.in.channels * kernel * kernel;
  l.bias_count = static_cast<std::size_t>(c_out);
  return push(std::move(l));
}

int NetworkBuilder::relu(int x, std::string name) {
  Layer l;
  l.kind = LayerKind::kRelu;
  l.name = std::move(name);
  l.inputs = {x};
  l.in = l.out = shape_of(x);
  return push(std::move(l));
}

int NetworkBuilder::avg_pool(int x, int kernel, int stride, int padding,
                             std::string name) {
  Layer l;
  l.kind = LayerKind::kAvgPool;
  l.name = std::move(name);
  l.inputs = {x};
  l.in = shape_of(x);
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.out = {l.in.channels, conv_output_size(l.in.height, kernel, stride, padding),
           conv_output_size(l.in.width, kernel, stride, padding)};
  if (l.out.height <= 0 || l.out.width <= 0 || padding >= kernel)
    fail(ErrorKind::kInvalidArgument,
         "layer '" + l.name + "': pool does not fit input " + l.in.str());
  return push(std::move(l));
}

int NetworkBuilder::global_avg_pool(int x, std::string name) {
  Layer l;
  l.kind = LayerKind::kGlobalAvgPool;
  l.name = std::move(name);
  l.inputs = {x};
  l.in = shape_of(x);
  l.out = {l.in.channels, 1, 1};
  return push(std::move(l));
}

int NetworkBuilder::linear(int x, int out_features, std::string name, bool bias) {
  Layer l;
  l.kind = LayerKind::kLinear;
  l.name = std::move(name);
  l.inputs = {x};
  l.in = shape_of(x);
  if (out_features <= 0 || l.in.height != 1 || l.in.width != 1)
    fail(ErrorKind::kInvalidArgument,
         "layer '" + l.name + "': linear needs a flat input, got " + l.in.str());
  l.out = {out_features, 1, 1};
  l.weight_count = static_cast<std::size_t>(out_features) * l.in.channels;
  l.bias_count = bias ? static_cast<std::size_t>(out_features) : 0;
  return push(std::move(l));
}

int NetworkBuilder::sum(std::vector<int> xs, std::vector<double> coeffs,
                        FeatureShape shape, std::string name) {
  if (xs.size() != coeffs.size())
    fail(ErrorKind::kInvalidArgument, "layer '" + name + "': coefficient count mismatch");
  for (int x : xs)
    if (shape_of(x) != shape)
      fail(ErrorKind::kInvalidArgument, "layer '" + name + "': summand shape " +
                                            shape_of(x).str() + " != " + shape.str());
  Layer l;
  l.kind = LayerKind::kSum;
  l.name = std::move(name);
  l.inputs = std::move(xs);
  l.coeffs = std::move(coeffs);
  l.in = l.out = shape;
  return push(std::move(l));
}

Network NetworkBuilder::build() && { return std::move(net_); }

// ---------------------------------------------------------------------------
// Parameters

std::uint64_t params_fingerprint(std::span<const double> params) {
  std::uint64_t h = splitmix64(params.size());
  for (double v : params) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

Network init_params(Network net, std::uint64_t seed) {
  auto params = net.mutable_params();
  for (const auto& l : net.layers()) {
    if (l.param_size() == 0) continue;
    double fan_in = l.kind == LayerKind::kConv2d
                        ? static_cast<double>(l.in.channels) * l.kernel * l.kernel
                        : static_cast<double>(l.in.channels);
    Rng rng(derive_seed(seed, l.name));
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    double* w = params.data() + l.param_offset;
    for (std::size_t i = 0; i < l.weight_count; ++i) w[i] = normal(rng);
    std::fill_n(w + l.weight_count, l.bias_count, 0.0);
  }
  return net;
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

Tensor make_value(std::size_t batch, FeatureShape s, bool flat) {
  if (flat) return Tensor({batch, static_cast<std::size_t>(s.channels)});
  return Tensor({batch, static_cast<std::size_t>(s.channels),
                 static_cast<std::size_t>(s.height), static_cast<std::size_t>(s.width)});
}

// Valid output index range [lo, hi) such that o * stride + offset lies in
// [0, size_in).
void valid_range(int offset, int stride, int size_in, int size_out, int& lo, int& hi) {
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  int top = size_in - 1 - offset;
  hi = top < 0 ? 0 : std::min(size_out, top / stride + 1);
  if (hi < lo) hi = lo;
}

// col[r][j] with r = (ci * K + kh) * K + kw and j = slot * OH * OW + oh * OW + ow,
// where slot indexes `samples`.
void im2col(const Layer& l, const double* x, std::span<const std::size_t> samples,
            std::vector<double>& col) {
  const int K = l.kernel, S = l.stride, P = l.padding;
  const int H = l.in.height, W = l.in.width, OH = l.out.height, OW = l.out.width;
  const std::size_t plane = static_cast<std::size_t>(OH) * OW;
  const std::size_t cols = samples.size() * plane;
  const std::size_t in_sample = l.in.size();
  col.assign(static_cast<std::size_t>(l.in.channels) * K * K * cols, 0.0);
  for (int ci = 0; ci < l.in.channels; ++ci)
    for (int kh = 0; kh < K; ++kh)
      for (int kw = 0; kw < K; ++kw) {
        double* row = col.data() + ((static_cast<std::size_t>(ci) * K + kh) * K + kw) * cols;
        int oh_lo, oh_hi, ow_lo, ow_hi;
        valid_range(kh - P, S, H, OH, oh_lo, oh_hi);
        valid_range(kw - P, S, W, OW, ow_lo, ow_hi);
        for (std::size_t s = 0; s < samples.size(); ++s) {
          const double* in = x + samples[s] * in_sample + static_cast<std::size_t>(ci) * H * W;
          double* dst = row + s * plane;
          for (int oh = oh_lo; oh < oh_hi; ++oh) {
            const double* irow = in + static_cast<std::size_t>(oh * S - P + kh) * W;
            double* drow = dst + static_cast<std::size_t>(oh) * OW;
            for (int ow = ow_lo; ow < ow_hi; ++ow) drow[ow] = irow[ow * S - P + kw];
          }
        }
      }
}

void col2im_add(const Layer& l, const std::vector<double>& col,
                std::span<const std::size_t> samples, double* dx) {
  const int K = l.kernel, S = l.stride, P = l.padding;
  const int H = l.in.height, W = l.in.width, OH = l.out.height, OW = l.out.width;
  const std::size_t plane = static_cast<std::size_t>(OH) * OW;
  const std::size_t cols = samples.size() * plane;
  const std::size_t in_sample = l.in.size();
  for (int ci = 0; ci < l.in.channels; ++ci)
    for (int kh = 0; kh < K; ++kh)
      for (int kw = 0; kw < K; ++kw) {
        const double* row =
            col.data() + ((static_cast<std::size_t>(ci) * K + kh) * K + kw) * cols;
        int oh_lo, oh_hi, ow_lo, ow_hi;
        valid_range(kh - P, S, H, OH, oh_lo, oh_hi);
        valid_range(kw - P, S, W, OW, ow_lo, ow_hi);
        for (std::size_t s = 0; s < samples.size(); ++s) {
          double* in = dx + samples[s] * in_sample + static_cast<std::size_t>(ci) * H * W;
          const double* src = row + s * plane;
          for (int oh = oh_lo; oh < oh_hi; ++oh) {
            double* irow = in + static_cast<std::size_t>(oh * S - P + kh) * W;
            const double* srow = src + static_cast<std::size_t>(oh) * OW;
            for (int ow = ow_lo; ow < ow_hi; ++ow) irow[ow * S - P + kw] += srow[ow];
          }
        }
      }
}

void conv_forward(const Layer& l, const double* params, const Tensor& x, Tensor& y,
                  std::span<const std::size_t> samples) {
  std::vector<double> col;
  im2col(l, x.data().data(), samples, col);
  const std::size_t rows = static_cast<std::size_t>(l.in.channels) * l.kernel * l.kernel;
  const std::size_t plane = l.out.size() / l.out.channels;
  const std::size_t cols = samples.size() * plane;
  const double* weight = params + l.param_offset;
  const double* bias = weight + l.weight_count;
  // Blocked over output channels and column tiles so each im2col tile is
  // read once per channel block while it is still in cache.
  constexpr int kCoBlock = 8;
  constexpr std::size_t kTile = 256;
  double acc[kCoBlock][kTile];
  double* out = y.data().data();
  for (int co0 = 0; co0 < l.out.channels; co0 += kCoBlock) {
    const int nb = std::min(kCoBlock, l.out.channels - co0);
    for (std::size_t j0 = 0; j0 < cols; j0 += kTile) {
      const std::size_t nj = std::min(kTile, cols - j0);
      for (int b = 0; b < nb; ++b) std::fill_n(acc[b], nj, bias[co0 + b]);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* crow = col.data() + r * cols + j0;
        for (int b = 0; b < nb; ++b) {
          const double w = weight[(co0 + b) * rows + r];
          double* a = acc[b];
          for (std::size_t j = 0; j < nj; ++j) a[j] += w * crow[j];
        }
      }
      for (int b = 0; b < nb; ++b)
        for (std::size_t j = 0; j < nj; ++j) {
          const std::size_t jj = j0 + j, s = jj / plane, p = jj % plane;
          out[samples[s] * l.out.size() + (co0 + b) * plane + p] = acc[b][j];
        }
    }
  }
}

void conv_backward(const Layer& l, const double* params, const Tensor& x,
                   const Tensor& dy, Tensor* dx, double* dparams,
                   std::span<const std::size_t> samples) {
  std::vector<double> col;
  im2col(l, x.data().data(), samples, col);
  const std::size_t rows = static_cast<std::size_t>(l.in.channels) * l.kernel * l.kernel;
  const std::size_t plane = l.out.size() / l.out.channels;
  const std::size_t cols = samples.size() * plane;
  const double* weight = params + l.param_offset;
  double* dweight = dparams + l.param_offset;
  double* dbias = dweight + l.weight_count;

  // dY gathered as [co][slot * plane + p].
  std::vector<double> g(static_cast<std::size_t>(l.out.channels) * cols);
  for (int co = 0; co < l.out.channels; ++co)
    for (std::size_t s = 0; s < samples.size(); ++s)
      std::copy_n(dy.data().data() + samples[s] * l.out.size() + co * plane, plane,
                  g.data() + co * cols + s * plane);

  for (int co = 0; co < l.out.channels; ++co) {
    const double* grow = g.data() + co * cols;
    double b = 0.0;
    for (std::size_t j = 0; j < cols; ++j) b += grow[j];
    dbias[co] += b;
    double* dw = dweight + co * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* crow = col.data() + r * cols;
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * crow[j];
      dw[r] += acc;
    }
  }
  if (dx == nullptr) return;
  std::fill(col.begin(), col.end(), 0.0);
  for (int co = 0; co < l.out.channels; ++co) {
    const double* grow = g.data() + co * cols;
    const double* wrow = weight + co * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = wrow[r];
      double* crow = col.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += w * grow[j];
    }
  }
  col2im_add(l, col, samples, dx->data().data());
}

// Average over in-bounds window elements only (padding is excluded from the
// divisor).
void pool_forward(const Layer& l, const Tensor& x, Tensor& y,
                  std::span<const std::size_t> samples) {
  const int K = l.kernel, S = l.stride, P = l.padding;
  const int H = l.in.height, W = l.in.width, OH = l.out.height, OW = l.out.width;
  for (std::size_t n : samples)
    for (int c = 0; c < l.in.channels; ++c) {
      const double* in = x.data().data() + n * l.in.size() + static_cast<std::size_t>(c) * H * W;
      double* out = y.data().data() + n * l.out.size() + static_cast<std::size_t>(c) * OH * OW;
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          int h0 = std::max(oh * S - P, 0), h1 = std::min(oh * S - P + K, H);
          int w0 = std::max(ow * S - P, 0), w1 = std::min(ow * S - P + K, W);
          double acc = 0.0;
          for (int h = h0; h < h1; ++h)
            for (int w = w0; w < w1; ++w) acc += in[h * W + w];
          out[oh * OW + ow] = acc / static_cast<double>((h1 - h0) * (w1 - w0));
        }
    }
}

void pool_backward(const Layer& l, const Tensor& dy, Tensor& dx,
                   std::span<const std::size_t> samples) {
  const int K = l.kernel, S = l.stride, P = l.padding;
  const int H = l.in.height, W = l.in.width, OH = l.out.height, OW = l.out.width;
  for (std::size_t n : samples)
    for (int c = 0; c < l.in.channels; ++c) {
      double* in = dx.data().data() + n * l.in.size() + static_cast<std::size_t>(c) * H * W;
      const double* out =
          dy.data().data() + n * l.out.size() + static_cast<std::size_t>(c) * OH * OW;
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          int h0 = std::max(oh * S - P, 0), h1 = std::min(oh * S - P + K, H);
          int w0 = std::max(ow * S - P, 0), w1 = std::min(ow * S - P + K, W);
          double g = out[oh * OW + ow] / static_cast<double>((h1 - h0) * (w1 - w0));
          for (int h = h0; h < h1; ++h)
            for (int w = w0; w < w1; ++w) in[h * W + w] += g;
        }
    }
}

std::vector<std::size_t> all_samples(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward / backward

ForwardResult forward(const Network& net, const Tensor& x) {
  const FeatureShape in = net.input_shape();
  const auto& layers = net.layers();
  std::string first = layers.empty() ? std::string("<input>") : layers.front().name;
  bool ok = false;
  if (x.rank() == 4)
    ok = x.dim(1) == static_cast<std::size_t>(in.channels) &&
         x.dim(2) == static_cast<std::size_t>(in.height) &&
         x.dim(3) == static_cast<std::size_t>(in.width);
  else if (x.rank() == 2)
    ok = in.height == 1 && in.width == 1 && x.dim(1) == static_cast<std::size_t>(in.channels);
  if (!ok || x.dim(0) == 0)
    fail(ErrorKind::kInvalidArgument, "shape mismatch at layer '" + first + "': expected N x " +
                                          in.str() + ", got " + x.shape_string());

  const std::size_t batch = x.dim(0);
  const auto samples = all_samples(batch);
  const double* params = net.params().data();
  ForwardResult result;
  Tape& tape = result.tape;
  tape.batch = batch;
  tape.params_fingerprint = params_fingerprint(net.params());
  tape.values.reserve(layers.size() + 1);
  tape.values.push_back(x);

  for (const auto& l : layers) {
    Tensor y = make_value(batch, l.out, l.kind == LayerKind::kLinear ||
                                            l.kind == LayerKind::kGlobalAvgPool);
    switch (l.kind) {
      case LayerKind::kConv2d:
        conv_forward(l, params, tape.values[l.inputs[0]], y, samples);
        break;
      case LayerKind::kRelu: {
        auto src = tape.values[l.inputs[0]].data();
        auto dst = y.data();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
        break;
      }
      case LayerKind::kAvgPool:
        pool_forward(l, tape.values[l.inputs[0]], y, samples);
        break;
      case LayerKind::kGlobalAvgPool: {
        const std::size_t plane = static_cast<std::size_t>(l.in.height) * l.in.width;
        auto src = tape.values[l.inputs[0]].data();
        for (std::size_t n = 0; n < batch; ++n)
          for (int c = 0; c < l.in.channels; ++c) {
            const double* p = src.data() + n * l.in.size() + c * plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += p[i];
            y[n * l.out.channels + c] = acc / static_cast<double>(plane);
          }
        break;
      }
      case LayerKind::kLinear: {
        const double* w = params + l.param_offset;
        const double* b = w + l.weight_count;
        auto src = tape.values[l.inputs[0]].data();
        const int in_f = l.in.channels, out_f = l.out.channels;
        for (std::size_t n = 0; n < batch; ++n)
          for (int o = 0; o < out_f; ++o) {
            double acc = l.bias_count ? b[o] : 0.0;
            for (int i = 0; i < in_f; ++i) acc += w[o * in_f + i] * src[n * in_f + i];
            y[n * out_f + o] = acc;
          }
        break;
      }
      case LayerKind::kSum: {
        auto dst = y.data();
        for (std::size_t k = 0; k < l.inputs.size(); ++k) {
          auto src = tape.values[l.inputs[k]].data();
          const double c = l.coeffs[k];
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c * src[i];
        }
        break;
      }
    }
    tape.values.push_back(std::move(y));
  }
  result.output = tape.values.back();
  return result;
}

Gradients backward(const Network& net, const Tape& tape, const Tensor& output_seed_grad) {
  if (tape.values.size() != net.layers().size() + 1 ||
      tape.params_fingerprint != params_fingerprint(net.params()))
    fail(ErrorKind::kInvalidArgument,
         "stale tape: network parameters changed since the forward pass");
  const Tensor& y = tape.values.back();
  if (output_seed_grad.numel() != y.numel())
    fail(ErrorKind::kInvalidArgument, "seed gradient shape " + output_seed_grad.shape_string() +
                                          " does not match output " + y.shape_string());

  const auto& layers = net.layers();
  const std::size_t batch = tape.batch;
  const double* params = net.params().data();

  // Samples never interact, so only samples with a nonzero seed can carry
  // gradient anywhere in the graph.
  std::vector<std::size_t> active;
  const std::size_t per_out = y.numel() / batch;
  for (std::size_t n = 0; n < batch; ++n) {
    auto row = output_seed_grad.data().subspan(n * per_out, per_out);
    if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; }))
      active.push_back(n);
  }

  Gradients grads;
  grads.params.assign(net.param_count(), 0.0);
  std::vector<Tensor> g(tape.values.size());
  g.back() = Tensor(y.shape(), std::vector<double>(output_seed_grad.data().begin(),
                                                   output_seed_grad.data().end()));
  auto grad_of = [&](int v) -> Tensor& {
    if (g[v].empty()) g[v] = Tensor(tape.values[v].shape(), 0.0);
    return g[v];
  };

  if (!active.empty()) {
    for (std::size_t li = layers.size(); li-- > 0;) {
      const Layer& l = layers[li];
      const Tensor& dy = g[li + 1];
      if (dy.empty()) continue;
      const Tensor& x = tape.values[l.inputs.empty() ? 0 : l.inputs[0]];
      switch (l.kind) {
        case LayerKind::kConv2d:
          conv_backward(l, params, x, dy, &grad_of(l.inputs[0]), grads.params.data(), active);
          break;
        case LayerKind::kRelu: {
          auto& dx = grad_of(l.inputs[0]);
          const std::size_t sz = l.in.size();
          for (std::size_t n : active)
            for (std::size_t i = n * sz; i < (n + 1) * sz; ++i)
              if (x[i] > 0.0) dx[i] += dy[i];
          break;
        }
        case LayerKind::kAvgPool:
          pool_backward(l, dy, grad_of(l.inputs[0]), active);
          break;
        case LayerKind::kGlobalAvgPool: {
          auto& dx = grad_of(l.inputs[0]);
          const std::size_t plane = static_cast<std::size_t>(l.in.height) * l.in.width;
          for (std::size_t n : active)
            for (int c = 0; c < l.in.channels; ++c) {
              double v = dy[n * l.out.channels + c] / static_cast<double>(plane);
              double* p = dx.data().data() + n * l.in.size() + c * plane;
              for (std::size_t i = 0; i < plane; ++i) p[i] += v;
            }
          break;
        }
        case LayerKind::kLinear: {
          auto& dx = grad_of(l.inputs[0]);
          const double* w = params + l.param_offset;
          double* dw = grads.params.data() + l.param_offset;
          double* db = dw + l.weight_count;
          const int in_f = l.in.channels, out_f = l.out.channels;
          for (std::size_t n : active)
            for (int o = 0; o < out_f; ++o) {
              const double go = dy[n * out_f + o];
              if (l.bias_count) db[o] += go;
              for (int i = 0; i < in_f; ++i) {
                dw[o * in_f + i] += go * x[n * in_f + i];
                dx[n * in_f + i] += go * w[o * in_f + i];
              }
            }
          break;
        }
        case LayerKind::kSum: {
          const std::size_t sz = l.out.size();
          for (std::size_t k = 0; k < l.inputs.size(); ++k) {
            auto& dx = grad_of(l.inputs[k]);
            const double c = l.coeffs[k];
            for (std::size_t n : active)
              for (std::size_t i = n * sz; i < (n + 1) * sz; ++i) dx[i] += c * dy[i];
          }
          break;
        }
      }
    }
  }
  grads.input = g[0].empty() ? Tensor(tape.values[0].shape(), 0.0) : std::move(g[0]);
  return grads;
}

std::vector<double> grad_params(const Network& net, const Tape& tape,
                                const Tensor& output_seed_grad) {
  return backward(net, tape, output_seed_grad).params;
}

// ---------------------------------------------------------------------------
// Activation patterns

ActivationPatterns::ActivationPatterns(std::size_t samples, std::size_t bits)
    : samples_(samples), bits_(bits), words_((bits + 63) / 64),
      data_(samples * words_, 0) {}

bool ActivationPatterns::bit(std::size_t sample, std::size_t i) const {
  return (data_[sample * words_ + i / 64] >> (i % 64)) & 1U;
}

void ActivationPatterns::set(std::size_t sample, std::size_t i) {
  data_[sample * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
}

std::span<const std::uint64_t> ActivationPatterns::row(std::size_t sample) const {
  return std::span<const std::uint64_t>(data_).subspan(sample * words_, words_);
}

ActivationPatterns activation_pattern(const Network& net, const Tape& tape) {
  const std::size_t bits = net.relu_units();
  if (bits == 0) fail(ErrorKind::kInvalidArgument, "network has no ReLU units");
  if (tape.values.size() != net.layers().size() + 1)
    fail(ErrorKind::kInvalidArgument, "tape does not belong to this network");
  ActivationPatterns out(tape.batch, bits);
  std::size_t offset = 0;
  for (const auto& l : net.layers()) {
    if (l.kind != LayerKind::kRelu) continue;
    const Tensor& pre = tape.values[l.inputs[0]];
    const std::size_t sz = l.in.size();
    for (std::size_t n = 0; n < tape.batch; ++n)
      for (std::size_t i = 0; i < sz; ++i)
        if (pre[n * sz + i] > 0.0) out.set(n, offset + i);
    offset += sz;
  }
  return out;
}

}  // namespace zsnas
