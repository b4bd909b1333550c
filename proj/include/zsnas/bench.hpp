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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "zsnas/hardware.hpp"
#include "zsnas/search.hpp"

namespace zsnas {

struct KendallCounts {
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t ties_a_only = 0;  // tied in a, not in b
  std::uint64_t ties_b_only = 0;
  std::uint64_t ties_both = 0;
};

/// Pair classification in O(n log n) (sort + merge-sort inversion count).
KendallCounts kendall_counts(std::span<const double> a, std::span<const double> b);

/// Tie-adjusted tau-b = (C - D) / sqrt((C + D + T_b) (C + D + T_a)) where T_a
/// (T_b) counts pairs tied only in a (b). Throws ErrorKind::kInvalidArgument on
/// length mismatch, n < 2, NaN, or a side whose values are all equal.
double kendall_tau(std::span<const double> a, std::span<const double> b);

struct BenchRecord {
  std::string arch;
  double accuracy = 0.0;
};

/// JSON-lines file of {"arch": ..., "accuracy": ...} objects.
std::vector<BenchRecord> load_bench(const std::filesystem::path& path);
std::vector<BenchRecord> parse_bench(const std::string& text);

enum class ProxyKind { kKappa, kLr, kFlops, kLatency, kCombined };
enum class SweepAxis { kBatchSize, kRepeats };

const char* proxy_kind_name(ProxyKind p);
std::optional<ProxyKind> proxy_kind_from_name(const std::string& name);
const char* sweep_axis_name(SweepAxis a);
std::optional<SweepAxis> sweep_axis_from_name(const std::string& name);

struct TauSweepConfig {
  SearchConfig search;  // macro, proxy settings and combined-score weights
  ProxyKind proxy = ProxyKind::kKappa;
  SweepAxis axis = SweepAxis::kBatchSize;
  std::vector<int> axis_values = {4, 8, 16, 32, 64, 128};
  std::size_t sample = 500;
};

struct TauReport {
  std::string proxy;
  std::string axis;
  std::vector<int> axis_values;
  std::vector<double> tau;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

/// Per-record proxy values oriented so that larger means better predicted
/// accuracy: -kappa, regions, FLOPs, latency, and minus the weighted rank sum
/// for the combined score.
std::vector<double> proxy_values(const std::vector<BenchRecord>& records, ProxyKind proxy,
                                 const SearchConfig& cfg, const LatencyTable* table);

TauReport tau_sweep(const std::vector<BenchRecord>& records, const TauSweepConfig& cfg,
                    const LatencyTable* table);

std::string tau_report_jsonl(const TauReport& report);

/// One row of a comparison table. Fields taken from the input (params,
/// FLOPs, search time, accuracy) are rendered exactly as given.
struct ReportEntry {
  std::string label;
  std::optional<std::string> arch;
  nlohmann::json flops_m;
  nlohmann::json params_m;
  std::optional<double> latency_us;
  nlohmann::json search_time;
  nlohmann::json acc;
  bool baseline = false;
};

std::vector<ReportEntry> parse_report_entries(const std::string& text);
std::vector<ReportEntry> load_report_entries(const std::filesystem::path& path);

struct ReportRow {
  std::string label;
  std::string flops_m;
  std::string params_m;
  std::string speedup;
  std::string search_time;
  std::string acc;
  std::optional<double> latency_us;
};

/// Builds the table. Speedup is L(baseline) / L(entry), the baseline being
/// the entry flagged `baseline` or else the first entry with a latency.
std::vector<ReportRow> compare_report(const std::vector<ReportEntry>& entries,
                                      const MacroConfig& macro, const LatencyTable* table);
std::string format_report_text(const std::vector<ReportRow>& rows);
std::string format_report_jsonl(const std::vector<ReportRow>& rows);

}  // namespace zsnas
