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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "zsnas/hardware.hpp"
#include "zsnas/linalg.hpp"
#include "zsnas/network.hpp"
#include "zsnas/search_space.hpp"

namespace zsnas {

enum class InputSource { kGaussian, kImageFile };

struct ProxyConfig {
  int batch_size = 32;
  int ntk_repeats = 3;
  int lr_samples = 1000;
  FeatureShape lr_input{3, 8, 8};
  std::uint64_t seed = 0;
  InputSource input_source = InputSource::kGaussian;
  /// Image pool for InputSource::kImageFile (see load_image_batch).
  std::shared_ptr<const Tensor> images;
  int threads = 1;

  void validate() const;
};

struct KappaResult {
  double mean = kKappaSentinel;
  std::vector<double> per_repeat;
};

struct ProxyScores {
  double kappa = kKappaSentinel;
  std::vector<double> kappa_per_repeat;
  double lr_count = 1.0;
  double flops = 0.0;
  double params = 0.0;
  std::optional<double> latency_us;
};

/// Raw image batch: N, C, H, W as little-endian uint32 followed by N*C*H*W
/// little-endian float32 values.
Tensor load_image_batch(const std::filesystem::path& path);
void save_image_batch(const std::filesystem::path& path, const Tensor& batch);

/// Gram matrix of per-sample gradients of the summed logits.
SquareMatrix ntk_matrix(const Network& net, const Tensor& batch);

/// Per-sample gradient rows used by ntk_matrix, one row per sample.
std::vector<std::vector<double>> ntk_jacobian(const Network& net, const Tensor& batch);

/// Mean NTK condition number over cfg.ntk_repeats fresh initialisations and
/// batches. Any sentinel repeat makes the mean the sentinel. `stream_key`
/// selects the random streams; callers comparing related networks pass the
/// same key so shared layers see identical weights and inputs.
KappaResult ntk_kappa_state(const SupernetState& state, const MacroConfig& macro,
                            const ProxyConfig& cfg, std::uint64_t stream_key);
KappaResult ntk_kappa(const CellArch& arch, const MacroConfig& macro, const ProxyConfig& cfg);

/// Distinct ReLU activation patterns among cfg.lr_samples Gaussian inputs.
std::size_t count_linear_regions_state(const SupernetState& state, const MacroConfig& macro,
                                       const ProxyConfig& cfg, std::uint64_t stream_key);
std::size_t count_linear_regions(const CellArch& arch, const MacroConfig& macro,
                                 const ProxyConfig& cfg);
/// Distinct activation patterns of `net` over the rows of `inputs`.
std::size_t count_distinct_patterns(const Network& net, const Tensor& inputs,
                                    std::size_t chunk = 32);

/// Draws the NTK batch for one repeat.
Tensor draw_ntk_batch(const ProxyConfig& cfg, const FeatureShape& shape, std::uint64_t seed);
Tensor gaussian_batch(std::size_t n, const FeatureShape& shape, std::uint64_t seed);

/// All indicators for one architecture; latency only when `table` is given.
ProxyScores score_arch(const CellArch& arch, const MacroConfig& macro, const ProxyConfig& cfg,
                       const LatencyTable* table);

}  // namespace zsnas
