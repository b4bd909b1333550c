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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zsnas/tensor.hpp"

namespace zsnas {

/// Per-sample feature shape. Vectors (after global pooling) use H = W = 1.
struct FeatureShape {
  int channels = 0;
  int height = 1;
  int width = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  std::string str() const;
  friend bool operator==(const FeatureShape&, const FeatureShape&) = default;
};

enum class LayerKind { kConv2d, kRelu, kAvgPool, kGlobalAvgPool, kLinear, kSum };

const char* layer_kind_name(LayerKind kind);

/// One node of the layer graph. Inputs are value ids: 0 is the network input
/// and k > 0 is the output of layer k - 1, so layers are always stored in a
/// valid evaluation order.
struct Layer {
  LayerKind kind = LayerKind::kRelu;
  std::string name;
  std::vector<int> inputs;
  std::vector<double> coeffs;  // kSum only
  FeatureShape in;
  FeatureShape out;
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  std::size_t param_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_count = 0;

  std::size_t param_size() const { return weight_count + bias_count; }
};

/// Conv/pool output extent: floor((size + 2 * padding - kernel) / stride) + 1.
int conv_output_size(int size, int kernel, int stride, int padding);

class NetworkBuilder;

/// Immutable layer graph plus its flat parameter vector.
class Network {
 public:
  const std::vector<Layer>& layers() const { return layers_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::size_t param_count() const { return params_.size(); }
  FeatureShape input_shape() const { return input_; }
  FeatureShape output_shape() const;
  std::size_t relu_units() const;

 private:
  friend class NetworkBuilder;
  FeatureShape input_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

class NetworkBuilder {
 public:
  explicit NetworkBuilder(FeatureShape input);

  static constexpr int input() { return 0; }

  int conv2d(int x, int c_out, int kernel, int stride, int padding,
             std::string name);
  int relu(int x, std::string name);
  int avg_pool(int x, int kernel, int stride, int padding, std::string name);
  int global_avg_pool(int x, std::string name);
  int linear(int x, int out_features, std::string name, bool bias = true);
  /// Weighted sum of values. With no inputs the result is all zeros of `shape`.
  int sum(std::vector<int> xs, std::vector<double> coeffs, FeatureShape shape,
          std::string name);

  FeatureShape shape_of(int value) const;
  int last() const { return static_cast<int>(net_.layers_.size()); }

  /// Finishes the graph; the output is the value of the last layer added.
  Network build() &&;

 private:
  int push(Layer layer);

  Network net_;
};

/// Activations recorded by one forward pass.
struct Tape {
  std::vector<Tensor> values;  // values[0] is the input
  std::uint64_t params_fingerprint = 0;
  std::size_t batch = 0;
};

struct ForwardResult {
  Tensor output;
  Tape tape;
};

struct Gradients {
  std::vector<double> params;
  Tensor input;
};

std::uint64_t params_fingerprint(std::span<const double> params);

/// Kaiming-normal weights (std = sqrt(2 / fan_in)), zero biases. Each layer
/// draws from a stream keyed by (seed, layer name), so a layer's weights do
/// not depend on which other layers exist.
Network init_params(Network net, std::uint64_t seed);

/// Evaluates the graph on an N x C x H x W batch.
ForwardResult forward(const Network& net, const Tensor& x);

/// Reverse pass for L = <output_seed_grad, y>.
Gradients backward(const Network& net, const Tape& tape,
                   const Tensor& output_seed_grad);

std::vector<double> grad_params(const Network& net, const Tape& tape,
                                const Tensor& output_seed_grad);

/// ReLU on/off bits, one row per sample, ordered by ReLU layer then element.
class ActivationPatterns {
 public:
  ActivationPatterns(std::size_t samples, std::size_t bits);

  std::size_t samples() const { return samples_; }
  std::size_t bits_per_sample() const { return bits_; }
  bool bit(std::size_t sample, std::size_t i) const;
  void set(std::size_t sample, std::size_t i);
  std::span<const std::uint64_t> row(std::size_t sample) const;

 private:
  std::size_t samples_;
  std::size_t bits_;
  std::size_t words_;
  std::vector<std::uint64_t> data_;
};

ActivationPatterns activation_pattern(const Network& net, const Tape& tape);

}  // namespace zsnas
