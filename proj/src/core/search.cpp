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

#include "zsnas/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "zsnas/error.hpp"
#include "zsnas/parallel.hpp"

namespace zsnas {

void SearchConfig::validate() const {
  macro.validate();
  proxy.validate();
  for (double w : {w_kappa, w_lr, w_flops, w_latency})
    if (!std::isfinite(w) || w < 0.0)
      fail(ErrorKind::kInvalidArgument, "search weights must be finite and non-negative");
  if (w_kappa <= 0.0 && w_lr <= 0.0)
    fail(ErrorKind::kInvalidArgument, "at least one of the kappa and region weights must be > 0");
  if (latency_budget_us && !(*latency_budget_us >= 0.0))
    fail(ErrorKind::kInvalidArgument, "latency budget must be non-negative");
  if (flops_budget && !(*flops_budget >= 0.0))
    fail(ErrorKind::kInvalidArgument, "FLOPs budget must be non-negative");
}

namespace {

// Search-time evaluations of related states share one random stream so that
// deltas compare identical weights on identical inputs.
constexpr std::uint64_t kSearchStreamKey = 0;

double hardware_cost(const SupernetState& state, const SearchConfig& cfg,
                     const LatencyTable* table, CostMetric metric) {
  if (metric == CostMetric::kLatency && !table) return 0.0;
  if (cfg.hardware_aggregate == HardwareAggregate::kMean) {
    auto cost = expected_cost(state, cfg.macro, metric == CostMetric::kLatency ? table : nullptr);
    return metric == CostMetric::kFlops ? cost.flops : cost.latency_us;
  }
  auto arch = extreme_completion(state, cfg.macro, table, metric,
                                 cfg.hardware_aggregate == HardwareAggregate::kMax);
  return metric == CostMetric::kFlops ? count_flops(arch, cfg.macro).flops
                                      : estimate_latency(arch, cfg.macro, *table).latency_us;
}

struct BudgetCheck {
  bool ok = true;
  std::string reason;
};

BudgetCheck check_budgets(const SupernetState& state, const SearchConfig& cfg,
                          const LatencyTable* table) {
  std::ostringstream why;
  if (cfg.latency_budget_us) {
    double bound = min_completion_latency(state, cfg.macro, *table);
    if (bound > *cfg.latency_budget_us) {
      why << "latency lower bound " << bound << " us exceeds budget " << *cfg.latency_budget_us
          << " us";
      return {false, why.str()};
    }
  }
  if (cfg.flops_budget) {
    double bound = min_completion_flops(state, cfg.macro);
    if (bound > *cfg.flops_budget) {
      why << "FLOPs lower bound " << bound << " exceeds budget " << *cfg.flops_budget;
      return {false, why.str()};
    }
  }
  return {};
}

}  // namespace

StateEvaluation evaluate_state(const SupernetState& state, const SearchConfig& cfg,
                               const LatencyTable* table) {
  ProxyConfig proxy = cfg.proxy;
  proxy.threads = 1;
  StateEvaluation ev;
  ev.kappa = ntk_kappa_state(state, cfg.macro, proxy, kSearchStreamKey).mean;
  ev.lr = static_cast<double>(
      count_linear_regions_state(state, cfg.macro, proxy, kSearchStreamKey));
  ev.flops = hardware_cost(state, cfg, table, CostMetric::kFlops);
  ev.latency = hardware_cost(state, cfg, table, CostMetric::kLatency);
  return ev;
}

double kappa_delta(double after, double before) {
  if (after == kKappaSentinel) return kKappaSentinel;
  if (before == kKappaSentinel) return -kKappaSentinel;
  return after - before;
}

MetricDeltas state_deltas(const StateEvaluation& after, const StateEvaluation& before) {
  return {kappa_delta(after.kappa, before.kappa), after.lr - before.lr,
          after.flops - before.flops, after.latency - before.latency};
}

MetricDeltas score_candidate(const SupernetState& state, Prune prune, const SearchConfig& cfg,
                             const LatencyTable* table) {
  auto pruned = apply_prune(state, prune);
  return state_deltas(evaluate_state(pruned, cfg, table), evaluate_state(state, cfg, table));
}

std::vector<RankedCandidate> rank_aggregate(const std::vector<Candidate>& candidates,
                                            const SearchConfig& cfg) {
  const std::size_t n = candidates.size();
  auto metric = [&](std::size_t i, int m) {
    const auto& d = candidates[i].deltas;
    switch (m) {
      case kMetricKappa: return d.kappa;
      case kMetricLr: return -d.lr;  // higher is better
      case kMetricFlops: return d.flops;
      default: return d.latency;
    }
  };
  const std::array<double, kNumMetrics> weights = {cfg.w_kappa, cfg.w_lr, cfg.w_flops,
                                                   cfg.w_latency};
  std::vector<RankedCandidate> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].prune = candidates[i].prune;
    out[i].deltas = candidates[i].deltas;
    for (int m = 0; m < kNumMetrics; ++m) {
      int better = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (metric(j, m) < metric(i, m)) ++better;
      out[i].ranks[m] = better + 1;
      out[i].combined += weights[m] * out[i].ranks[m];
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.combined != b.combined) return a.combined < b.combined;
    if (a.prune.edge != b.prune.edge) return a.prune.edge < b.prune.edge;
    return op_code(a.prune.op) < op_code(b.prune.op);
  });
  return out;
}

SearchReport run_search(const SearchConfig& cfg, const LatencyTable* table) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  if (cfg.needs_latency_table() && !table)
    fail(ErrorKind::kLut, "a latency table is required when the latency weight or budget is set");
  const LatencyTable* lut = cfg.w_latency > 0.0 || cfg.latency_budget_us ? table : nullptr;

  SearchReport report;
  SupernetState state = cfg.start.value_or(SupernetState::full());
  if (auto check = check_budgets(state, cfg, lut); !check.ok)
    fail(ErrorKind::kInfeasible, "infeasible budget: " + check.reason);

  while (!state.resolved()) {
    ++report.rounds;
    std::vector<Prune> admissible;
    std::string blocked_reason;
    for (const Prune& p : candidate_prunes(state)) {
      auto check = check_budgets(apply_prune(state, p), cfg, lut);
      if (check.ok)
        admissible.push_back(p);
      else if (blocked_reason.empty())
        blocked_reason = check.reason;
    }
    if (admissible.empty())
      fail(ErrorKind::kInfeasible, "infeasible budget: every removal is blocked (" +
                                       blocked_reason + ") at state " + state.str());

    // Slot 0 is the current state, slot i + 1 the state without admissible[i].
    std::vector<StateEvaluation> evals(admissible.size() + 1);
    parallel_for(evals.size(), cfg.threads, [&](std::size_t i) {
      evals[i] = evaluate_state(i == 0 ? state : apply_prune(state, admissible[i - 1]), cfg, lut);
    });
    report.evaluations += evals.size();

    std::vector<Candidate> candidates;
    candidates.reserve(admissible.size());
    for (std::size_t i = 0; i < admissible.size(); ++i)
      candidates.push_back({admissible[i], state_deltas(evals[i + 1], evals[0])});

    std::array<bool, kNumEdges> pruned_edge{};
    bool applied = false;
    for (const auto& rc : rank_aggregate(candidates, cfg)) {
      if (applied && cfg.schedule == PruneSchedule::kGlobal) break;
      if (pruned_edge[rc.prune.edge] || !state.contains(rc.prune.edge, rc.prune.op) ||
          state.edge_size(rc.prune.edge) < 2)
        continue;
      SupernetState next = apply_prune(state, rc.prune);
      if (!check_budgets(next, cfg, lut).ok) continue;
      state = next;
      pruned_edge[rc.prune.edge] = true;
      applied = true;
      report.log.push_back(
          {report.rounds, rc.prune, rc.deltas, rc.ranks, rc.combined, state.str()});
    }
    if (!applied)
      fail(ErrorKind::kInfeasible, "infeasible budget: no admissible removal at state " +
                                       state.str());
  }

  report.chosen = state.arch();
  report.scores = score_arch(report.chosen, cfg.macro, cfg.proxy, table);
  ++report.evaluations;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace zsnas
