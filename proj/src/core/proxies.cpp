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

#include "zsnas/proxies.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "zsnas/error.hpp"
#include "zsnas/parallel.hpp"
#include "zsnas/rng.hpp"

namespace zsnas {

void ProxyConfig::validate() const {
  if (batch_size < 2) fail(ErrorKind::kInvalidArgument, "batch size must be at least 2");
  if (ntk_repeats < 1) fail(ErrorKind::kInvalidArgument, "NTK repeats must be at least 1");
  if (lr_samples < 1) fail(ErrorKind::kInvalidArgument, "linear-region samples must be >= 1");
  if (lr_input.channels <= 0 || lr_input.height <= 0 || lr_input.width <= 0)
    fail(ErrorKind::kInvalidArgument, "invalid linear-region input resolution");
  if (input_source == InputSource::kImageFile && !images)
    fail(ErrorKind::kInvalidArgument, "image input source selected but no image batch loaded");
}

// ---------------------------------------------------------------------------
// Image batches

namespace {

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

}  // namespace

Tensor load_image_batch(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot open image batch " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16) fail(ErrorKind::kParse, "image batch " + path.string() + ": truncated header");
  std::vector<std::size_t> shape(4);
  for (int i = 0; i < 4; ++i) {
    shape[i] = read_u32le(bytes.data() + 4 * i);
    if (shape[i] == 0) fail(ErrorKind::kParse, "image batch " + path.string() + ": zero dimension");
  }
  const std::size_t n = Tensor::count(shape);
  if (bytes.size() != 16 + 4 * n)
    fail(ErrorKind::kParse, "image batch " + path.string() + ": expected " +
                                std::to_string(16 + 4 * n) + " bytes, found " +
                                std::to_string(bytes.size()));
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i)
    data[i] = static_cast<double>(std::bit_cast<float>(read_u32le(bytes.data() + 16 + 4 * i)));
  return Tensor(std::move(shape), std::move(data));
}

void save_image_batch(const std::filesystem::path& path, const Tensor& batch) {
  if (batch.rank() != 4) fail(ErrorKind::kInvalidArgument, "image batch must be N x C x H x W");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot write " + path.string());
  for (std::size_t d : batch.shape()) write_u32le(f, static_cast<std::uint32_t>(d));
  for (double v : batch.data()) write_u32le(f, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

// ---------------------------------------------------------------------------
// Inputs

Tensor gaussian_batch(std::size_t n, const FeatureShape& shape, std::uint64_t seed) {
  Tensor t({n, static_cast<std::size_t>(shape.channels), static_cast<std::size_t>(shape.height),
            static_cast<std::size_t>(shape.width)});
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

Tensor draw_ntk_batch(const ProxyConfig& cfg, const FeatureShape& shape, std::uint64_t seed) {
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  if (cfg.input_source == InputSource::kGaussian) return gaussian_batch(b, shape, seed);
  const Tensor& pool = *cfg.images;
  if (pool.dim(1) != static_cast<std::size_t>(shape.channels) ||
      pool.dim(2) != static_cast<std::size_t>(shape.height) ||
      pool.dim(3) != static_cast<std::size_t>(shape.width))
    fail(ErrorKind::kInvalidArgument, "image batch samples are " + pool.shape_string() +
                                          ", network expects N x " + shape.str());
  if (pool.dim(0) < b)
    fail(ErrorKind::kInvalidArgument, "image batch holds " + std::to_string(pool.dim(0)) +
                                          " samples, batch size is " + std::to_string(b));
  // Partial Fisher-Yates: B distinct samples.
  std::vector<std::size_t> idx(pool.dim(0));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < b; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  const std::size_t per = shape.size();
  Tensor out({b, pool.dim(1), pool.dim(2), pool.dim(3)});
  for (std::size_t i = 0; i < b; ++i)
    std::copy_n(pool.data().begin() + idx[i] * per, per, out.data().begin() + i * per);
  return out;
}

// ---------------------------------------------------------------------------
// NTK

std::vector<std::vector<double>> ntk_jacobian(const Network& net, const Tensor& batch) {
  if (batch.rank() < 1 || batch.dim(0) < 2)
    fail(ErrorKind::kInvalidArgument, "NTK needs a batch of at least 2 samples");
  const std::size_t b = batch.dim(0);
  auto fw = forward(net, batch);
  const std::size_t per = fw.output.numel() / b;
  std::vector<std::vector<double>> rows(b);
  Tensor seed(fw.output.shape(), 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    std::fill(seed.data().begin(), seed.data().end(), 0.0);
    std::fill_n(seed.data().begin() + i * per, per, 1.0);
    rows[i] = grad_params(net, fw.tape, seed);
  }
  return rows;
}

SquareMatrix ntk_matrix(const Network& net, const Tensor& batch) {
  const auto rows = ntk_jacobian(net, batch);
  const std::size_t b = rows.size();
  SquareMatrix theta(b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = i; j < b; ++j) {
      double acc = 0.0;
      const auto& ri = rows[i];
      const auto& rj = rows[j];
      for (std::size_t k = 0; k < ri.size(); ++k) acc += ri[k] * rj[k];
      theta(i, j) = theta(j, i) = acc;
    }
  return theta;
}

KappaResult ntk_kappa_state(const SupernetState& state, const MacroConfig& macro,
                            const ProxyConfig& cfg, std::uint64_t stream_key) {
  cfg.validate();
  macro.validate();
  KappaResult out;
  out.per_repeat.assign(cfg.ntk_repeats, kKappaSentinel);
  parallel_for(out.per_repeat.size(), cfg.threads, [&](std::size_t r) {
    const std::uint64_t init_seed = derive_seed(derive_seed(cfg.seed, "ntk-init", stream_key), "repeat", r);
    const std::uint64_t batch_seed = derive_seed(derive_seed(cfg.seed, "ntk-batch", stream_key), "repeat", r);
    Network net = supernet_network(state, macro, init_seed);
    Tensor batch = draw_ntk_batch(cfg, macro.input, batch_seed);
    out.per_repeat[r] = condition_number(ntk_matrix(net, batch));
  });
  double sum = 0.0;
  for (double k : out.per_repeat) {
    if (k == kKappaSentinel) return out;
    sum += k;
  }
  out.mean = sum / static_cast<double>(out.per_repeat.size());
  return out;
}

KappaResult ntk_kappa(const CellArch& arch, const MacroConfig& macro, const ProxyConfig& cfg) {
  auto state = SupernetState::from_arch(arch);
  return ntk_kappa_state(state, macro, cfg, state.hash());
}

// ---------------------------------------------------------------------------
// Linear regions

std::size_t count_distinct_patterns(const Network& net, const Tensor& inputs, std::size_t chunk) {
  const std::size_t n = inputs.dim(0);
  if (n == 0) return 0;
  if (net.relu_units() == 0) return 1;
  const std::size_t per = inputs.numel() / n;
  std::set<std::vector<std::uint64_t>> seen;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start);
    auto shape = inputs.shape();
    shape[0] = m;
    std::vector<double> part(inputs.data().begin() + start * per,
                             inputs.data().begin() + (start + m) * per);
    auto fw = forward(net, Tensor(std::move(shape), std::move(part)));
    auto patterns = activation_pattern(net, fw.tape);
    for (std::size_t i = 0; i < m; ++i) {
      auto row = patterns.row(i);
      seen.emplace(row.begin(), row.end());
    }
  }
  return seen.size();
}

std::size_t count_linear_regions_state(const SupernetState& state, const MacroConfig& macro,
                                       const ProxyConfig& cfg, std::uint64_t stream_key) {
  cfg.validate();
  MacroConfig lr_macro = macro;
  lr_macro.input = cfg.lr_input;
  Network net = build_network(state, lr_macro, NetworkFlavor::kLinearRegions,
                              derive_seed(cfg.seed, "lr-init", stream_key));
  if (net.relu_units() == 0) return 1;
  Tensor inputs = gaussian_batch(static_cast<std::size_t>(cfg.lr_samples), cfg.lr_input,
                                 derive_seed(cfg.seed, "lr-input", stream_key));
  return count_distinct_patterns(net, inputs);
}

std::size_t count_linear_regions(const CellArch& arch, const MacroConfig& macro,
                                 const ProxyConfig& cfg) {
  auto state = SupernetState::from_arch(arch);
  return count_linear_regions_state(state, macro, cfg, state.hash());
}

ProxyScores score_arch(const CellArch& arch, const MacroConfig& macro, const ProxyConfig& cfg,
                       const LatencyTable* table) {
  ProxyScores s;
  auto kappa = ntk_kappa(arch, macro, cfg);
  s.kappa = kappa.mean;
  s.kappa_per_repeat = std::move(kappa.per_repeat);
  s.lr_count = static_cast<double>(count_linear_regions(arch, macro, cfg));
  CostBreakdown cost = table ? estimate_latency(arch, macro, *table) : count_flops(arch, macro);
  s.flops = cost.flops;
  s.params = cost.params;
  if (table) s.latency_us = cost.latency_us;
  return s;
}

}  // namespace zsnas
