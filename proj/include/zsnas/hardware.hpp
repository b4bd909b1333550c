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
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "zsnas/search_space.hpp"

namespace zsnas {

/// Lookup-table key. Cell operators use their canonical names; the fixed
/// skeleton uses "stem", "reduction" (whole residual block) and "classifier"
/// (global pooling + linear). h and w are the operator's input extent.
struct LatencyKey {
  std::string op;
  int c_in = 0;
  int c_out = 0;
  int h = 0;
  int w = 0;
  int stride = 1;

  std::string str() const;
  auto operator<=>(const LatencyKey&) const = default;
};

class LatencyTable {
 public:
  LatencyTable() = default;
  LatencyTable(std::map<LatencyKey, double> entries, double overhead_us, std::string label);

  const std::map<LatencyKey, double>& entries() const { return entries_; }
  double overhead_us() const { return overhead_us_; }
  const std::string& device_label() const { return label_; }
  std::optional<double> find(const LatencyKey& key) const;
  /// Latency for `key`. skip_connect and none default to 0 when absent; any
  /// other missing key throws ErrorKind::kLut naming the key.
  double lookup(const LatencyKey& key) const;

 private:
  std::map<LatencyKey, double> entries_;
  double overhead_us_ = 0.0;
  std::string label_;
};

inline constexpr const char* kLutHeader = "op,c_in,c_out,h,w,stride,latency_us";
inline constexpr const char* kLutOverheadOp = "__overhead__";

/// Reads the CSV lookup table. Lines starting with '#' are comments; a
/// "# device: <label>" comment sets the device label.
LatencyTable load_latency_table(const std::filesystem::path& path);
LatencyTable parse_latency_table(const std::string& text, const std::string& label = "");
std::string format_latency_table(const LatencyTable& table);

/// One costed unit of the instantiated model. For supernet expectations the
/// values are already scaled by `weight`.
struct CostRecord {
  std::string layer_id;
  LatencyKey key;
  int edge = -1;  // cell edge index, -1 for skeleton and overhead rows
  double weight = 1.0;
  double flops = 0.0;
  double params = 0.0;
  double latency_us = 0.0;
};

struct CostBreakdown {
  std::vector<CostRecord> records;
  double flops = 0.0;
  double params = 0.0;
  double latency_us = 0.0;
  bool has_latency = false;
};

/// FLOPs count multiply and add separately: conv 2*Ho*Wo*Co*Ci*K^2,
/// avg pool Ho*Wo*C*K^2, linear 2*Ci*Co. Parameters include biases.
CostBreakdown count_flops(const CellArch& arch, const MacroConfig& macro);

/// Expected cost of a supernet, each edge contributing the mean over its
/// surviving operators. Latency is filled in when `table` is given.
CostBreakdown expected_cost(const SupernetState& state, const MacroConfig& macro,
                            const LatencyTable* table);

/// Table lookups for every costed unit plus the constant overhead.
CostBreakdown estimate_latency(const CellArch& arch, const MacroConfig& macro,
                               const LatencyTable& table);

/// Latency of the cheapest completion of `state`: each edge takes its
/// minimum-latency surviving operator (summed over all cell instances).
double min_completion_latency(const SupernetState& state, const MacroConfig& macro,
                              const LatencyTable& table);
double min_completion_flops(const SupernetState& state, const MacroConfig& macro);

enum class CostMetric { kFlops, kLatency };

/// Completion of `state` with the lowest (or highest) total of `metric`.
/// Costs are additive per edge, so the choice is made edge by edge; ties go
/// to the lower op code.
CellArch extreme_completion(const SupernetState& state, const MacroConfig& macro,
                            const LatencyTable* table, CostMetric metric, bool maximize);

}  // namespace zsnas
