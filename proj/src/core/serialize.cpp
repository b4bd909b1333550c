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

#include "zsnas/serialize.hpp"

#include <cmath>

namespace zsnas {

nlohmann::json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json scores_json(const CellArch& arch, const ProxyScores& s, std::uint64_t seed) {
  nlohmann::json j;
  j["arch"] = format_arch(arch);
  j["seed"] = seed;
  j["kappa"] = number_json(s.kappa);
  auto per = nlohmann::json::array();
  for (double k : s.kappa_per_repeat) per.push_back(number_json(k));
  j["kappa_per_repeat"] = per;
  j["lr_count"] = s.lr_count;
  j["flops"] = s.flops;
  j["params"] = s.params;
  if (s.latency_us) j["latency_us"] = *s.latency_us;
  return j;
}

nlohmann::json cost_json(const CellArch& arch, const CostBreakdown& cost) {
  nlohmann::json j;
  j["arch"] = format_arch(arch);
  j["flops"] = cost.flops;
  j["params"] = cost.params;
  if (cost.has_latency) j["latency_us"] = cost.latency_us;
  auto layers = nlohmann::json::array();
  for (const auto& r : cost.records) {
    nlohmann::json l = {{"layer", r.layer_id}, {"op", r.key.op},         {"c_in", r.key.c_in},
                        {"c_out", r.key.c_out}, {"h", r.key.h},          {"w", r.key.w},
                        {"stride", r.key.stride}, {"flops", r.flops},    {"params", r.params}};
    if (cost.has_latency) l["latency_us"] = r.latency_us;
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

std::string search_report_jsonl(const SearchReport& report, std::uint64_t seed) {
  static constexpr const char* kMetricNames[kNumMetrics] = {"kappa", "lr", "flops", "latency"};
  std::string out;
  for (const auto& rec : report.log) {
    nlohmann::json j;
    j["type"] = "prune";
    j["round"] = rec.round;
    j["edge"] = rec.prune.edge;
    j["op"] = op_name(rec.prune.op);
    j["deltas"] = {{"kappa", number_json(rec.deltas.kappa)},
                   {"lr", rec.deltas.lr},
                   {"flops", rec.deltas.flops},
                   {"latency", rec.deltas.latency}};
    nlohmann::json ranks;
    for (int m = 0; m < kNumMetrics; ++m) ranks[kMetricNames[m]] = rec.ranks[m];
    j["ranks"] = ranks;
    j["combined"] = rec.combined;
    j["state"] = rec.state_after;
    out += j.dump() + "\n";
  }
  nlohmann::json fin;
  fin["type"] = "final";
  fin["arch"] = format_arch(report.chosen);
  fin["scores"] = scores_json(report.chosen, report.scores, seed);
  fin["rounds"] = report.rounds;
  fin["prunes"] = report.log.size();
  fin["evaluations"] = report.evaluations;
  out += fin.dump() + "\n";
  return out;
}

}  // namespace zsnas
