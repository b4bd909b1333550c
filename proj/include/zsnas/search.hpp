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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "zsnas/hardware.hpp"
#include "zsnas/proxies.hpp"
#include "zsnas/search_space.hpp"

namespace zsnas {

enum class PruneSchedule {
  kPerEdge,  // every undecided edge loses its best-ranked removal each round
  kGlobal,   // a single removal per round
};

enum class HardwareAggregate { kMean, kMin, kMax };

struct SearchConfig {
  MacroConfig macro;
  ProxyConfig proxy;
  double w_kappa = 1.0;
  double w_lr = 1.0;
  double w_flops = 0.0;
  double w_latency = 0.0;
  std::optional<double> latency_budget_us;
  std::optional<double> flops_budget;
  PruneSchedule schedule = PruneSchedule::kPerEdge;
  HardwareAggregate hardware_aggregate = HardwareAggregate::kMean;
  int threads = 1;
  /// Supernet to prune from; the full space when unset.
  std::optional<SupernetState> start;

  bool needs_latency_table() const { return w_latency > 0.0 || latency_budget_us.has_value(); }
  void validate() const;
};

enum Metric { kMetricKappa = 0, kMetricLr = 1, kMetricFlops = 2, kMetricLatency = 3 };
inline constexpr int kNumMetrics = 4;

/// Change caused by one removal. Kappa and the hardware costs are
/// lower-is-better, the region count higher-is-better.
struct MetricDeltas {
  double kappa = 0.0;
  double lr = 0.0;
  double flops = 0.0;
  double latency = 0.0;
};

struct Candidate {
  Prune prune;
  MetricDeltas deltas;
};

struct RankedCandidate {
  Prune prune;
  MetricDeltas deltas;
  std::array<int, kNumMetrics> ranks{};
  double combined = 0.0;
};

/// Proxy values of one supernet state.
struct StateEvaluation {
  double kappa = 0.0;
  double lr = 0.0;
  double flops = 0.0;
  double latency = 0.0;
};

StateEvaluation evaluate_state(const SupernetState& state, const SearchConfig& cfg,
                               const LatencyTable* table);

/// Kappa difference with sentinel handling: a sentinel after the removal is
/// +inf, a sentinel removed is -inf.
double kappa_delta(double after, double before);
MetricDeltas state_deltas(const StateEvaluation& after, const StateEvaluation& before);

MetricDeltas score_candidate(const SupernetState& state, Prune prune, const SearchConfig& cfg,
                             const LatencyTable* table);

/// Per-metric competition ranks (ties share the best rank), weighted rank sum,
/// ascending order with ties broken by (edge, op code).
std::vector<RankedCandidate> rank_aggregate(const std::vector<Candidate>& candidates,
                                            const SearchConfig& cfg);

struct PruneRecord {
  int round = 0;
  Prune prune;
  MetricDeltas deltas;
  std::array<int, kNumMetrics> ranks{};
  double combined = 0.0;
  std::string state_after;
};

struct SearchReport {
  CellArch chosen;
  ProxyScores scores;
  std::vector<PruneRecord> log;
  int rounds = 0;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
};

/// Hardware-aware pruning from the full supernet until one operator per edge
/// remains. Removals whose cheapest completion would break a budget are never
/// applied. Throws ErrorKind::kInfeasible when no removal is admissible and
/// ErrorKind::kLut when a latency table is required but missing.
SearchReport run_search(const SearchConfig& cfg, const LatencyTable* table);

}  // namespace zsnas
