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

#include "zsnas/hardware.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "zsnas/error.hpp"

namespace zsnas {

std::string LatencyKey::str() const {
  std::ostringstream s;
  s << "(" << op << ", c_in=" << c_in << ", c_out=" << c_out << ", h=" << h << ", w=" << w
    << ", stride=" << stride << ")";
  return s.str();
}

LatencyTable::LatencyTable(std::map<LatencyKey, double> entries, double overhead_us,
                           std::string label)
    : entries_(std::move(entries)), overhead_us_(overhead_us), label_(std::move(label)) {
  if (!(overhead_us_ >= 0.0) || !std::isfinite(overhead_us_))
    fail(ErrorKind::kLut, "latency overhead must be finite and non-negative");
  for (const auto& [key, us] : entries_)
    if (!(us >= 0.0) || !std::isfinite(us))
      fail(ErrorKind::kLut, "negative or non-finite latency for " + key.str());
}

std::optional<double> LatencyTable::find(const LatencyKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double LatencyTable::lookup(const LatencyKey& key) const {
  if (auto v = find(key)) return *v;
  if (key.op == op_name(OpKind::kNone) || key.op == op_name(OpKind::kSkipConnect)) return 0.0;
  fail(ErrorKind::kLut, "latency table has no entry for " + key.str());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void row_error(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::kLut, "latency table line " + std::to_string(line_no) + ": " + what);
}

int parse_int_field(std::string_view s, std::size_t line_no, const char* field) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0)
    row_error(line_no, std::string("field ") + field + " is not a non-negative integer: '" +
                           std::string(s) + "'");
  return v;
}

double parse_latency_field(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    row_error(line_no, "latency is not a decimal number: '" + std::string(s) + "'");
  if (v < 0.0) row_error(line_no, "negative latency " + std::string(s));
  return v;
}

}  // namespace

LatencyTable parse_latency_table(const std::string& text, const std::string& label) {
  std::map<LatencyKey, double> entries;
  std::optional<double> overhead;
  std::string device = label;
  bool header_seen = false;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("device:")) device = std::string(trim(body.substr(7)));
      continue;
    }
    if (!header_seen) {
      if (line != kLutHeader)
        row_error(line_no, std::string("expected header '") + kLutHeader + "'");
      header_seen = true;
      continue;
    }
    auto f = split(line);
    if (f.size() != 7)
      row_error(line_no, "expected 7 comma-separated fields, got " + std::to_string(f.size()));
    if (f[0].empty()) row_error(line_no, "empty operator name");
    LatencyKey key{std::string(f[0]),
                   parse_int_field(f[1], line_no, "c_in"),
                   parse_int_field(f[2], line_no, "c_out"),
                   parse_int_field(f[3], line_no, "h"),
                   parse_int_field(f[4], line_no, "w"),
                   parse_int_field(f[5], line_no, "stride")};
    double us = parse_latency_field(f[6], line_no);
    if (key.op == kLutOverheadOp) {
      if (overhead) row_error(line_no, "duplicate overhead row");
      overhead = us;
      continue;
    }
    if (!entries.emplace(key, us).second) row_error(line_no, "duplicate key " + key.str());
  }
  if (!header_seen) fail(ErrorKind::kLut, "latency table is empty (header missing)");
  if (!overhead)
    fail(ErrorKind::kLut, std::string("latency table has no '") + kLutOverheadOp + "' row");
  return LatencyTable(std::move(entries), *overhead, device);
}

LatencyTable load_latency_table(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kLut, "cannot open latency table " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_latency_table(buf.str(), path.stem().string());
}

std::string format_latency_table(const LatencyTable& table) {
  std::ostringstream s;
  s.precision(std::numeric_limits<double>::max_digits10);
  if (!table.device_label().empty()) s << "# device: " << table.device_label() << "\n";
  s << kLutHeader << "\n";
  for (const auto& [k, us] : table.entries())
    s << k.op << "," << k.c_in << "," << k.c_out << "," << k.h << "," << k.w << "," << k.stride
      << "," << us << "\n";
  s << kLutOverheadOp << ",0,0,0,0,0," << table.overhead_us() << "\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Cost model

namespace {

double conv_flops(int h_out, int w_out, int c_out, int c_in, int k) {
  return 2.0 * h_out * w_out * c_out * c_in * k * k;
}
double conv_params(int c_out, int c_in, int k) {
  return static_cast<double>(c_out) * (static_cast<double>(c_in) * k * k + 1.0);
}

CostRecord stem_unit(const MacroConfig& m) {
  const int c = m.stem_channels, h = m.input.height, w = m.input.width;
  CostRecord r;
  r.layer_id = "stem";
  r.key = {"stem", m.input.channels, c, h, w, 1};
  r.flops = conv_flops(h, w, c, m.input.channels, 3);
  r.params = conv_params(c, m.input.channels, 3);
  return r;
}

CostRecord reduction_unit(const MacroConfig& m, int stage) {
  const int c_in = m.stage_channels(stage - 1), c_out = m.stage_channels(stage);
  const int h = m.stage_height(stage - 1), w = m.stage_width(stage - 1);
  const int ho = h / 2, wo = w / 2;
  CostRecord r;
  r.layer_id = "reduce" + std::to_string(stage);
  r.key = {"reduction", c_in, c_out, h, w, 2};
  r.flops = conv_flops(ho, wo, c_out, c_in, 3) + conv_flops(ho, wo, c_out, c_out, 3) +
            static_cast<double>(ho) * wo * c_in * 4 + conv_flops(ho, wo, c_out, c_in, 1);
  r.params = conv_params(c_out, c_in, 3) + conv_params(c_out, c_out, 3) +
             conv_params(c_out, c_in, 1);
  return r;
}

CostRecord classifier_unit(const MacroConfig& m) {
  const int s = MacroConfig::kStages - 1;
  const int c = m.stage_channels(s), h = m.stage_height(s), w = m.stage_width(s);
  CostRecord r;
  r.layer_id = "classifier";
  r.key = {"classifier", c, m.num_classes, h, w, 1};
  r.flops = static_cast<double>(h) * w * c + 2.0 * c * m.num_classes;
  r.params = static_cast<double>(m.num_classes) * (c + 1);
  return r;
}

CostRecord cell_unit(const MacroConfig& m, int stage, int cell, int edge, OpKind op) {
  const int c = m.stage_channels(stage), h = m.stage_height(stage), w = m.stage_width(stage);
  CostRecord r;
  r.layer_id = "s" + std::to_string(stage) + ".c" + std::to_string(cell) + ".e" +
               std::to_string(kCellEdges[edge].from) + std::to_string(kCellEdges[edge].to) +
               "." + op_name(op);
  r.key = {op_name(op), c, c, h, w, 1};
  r.edge = edge;
  switch (op) {
    case OpKind::kNone:
    case OpKind::kSkipConnect:
      break;
    case OpKind::kNorConv1x1:
      r.flops = conv_flops(h, w, c, c, 1);
      r.params = conv_params(c, c, 1);
      break;
    case OpKind::kNorConv3x3:
      r.flops = conv_flops(h, w, c, c, 3);
      r.params = conv_params(c, c, 3);
      break;
    case OpKind::kAvgPool3x3:
      r.flops = static_cast<double>(h) * w * c * 9;
      break;
  }
  return r;
}

// Canonical record order: stem, then per stage the reduction block followed by
// every cell's edges in index order, then the classifier.
template <typename EdgeOps>
CostBreakdown build_breakdown(const MacroConfig& m, EdgeOps&& edge_ops) {
  m.validate();
  CostBreakdown b;
  b.records.push_back(stem_unit(m));
  for (int s = 0; s < MacroConfig::kStages; ++s) {
    if (s > 0) b.records.push_back(reduction_unit(m, s));
    for (int c = 0; c < m.cells_per_stage; ++c)
      for (int e = 0; e < kNumEdges; ++e) {
        auto ops = edge_ops(e);
        const double weight = 1.0 / static_cast<double>(ops.size());
        for (OpKind op : ops) {
          CostRecord r = cell_unit(m, s, c, e, op);
          r.weight = weight;
          r.flops *= weight;
          r.params *= weight;
          b.records.push_back(std::move(r));
        }
      }
  }
  b.records.push_back(classifier_unit(m));
  return b;
}

void add_latency(CostBreakdown& b, const LatencyTable& t) {
  for (auto& r : b.records) r.latency_us = r.weight * t.lookup(r.key);
  CostRecord overhead;
  overhead.layer_id = kLutOverheadOp;
  overhead.key = {kLutOverheadOp, 0, 0, 0, 0, 0};
  overhead.latency_us = t.overhead_us();
  b.records.push_back(std::move(overhead));
  b.has_latency = true;
}

void total(CostBreakdown& b) {
  b.flops = b.params = b.latency_us = 0.0;
  for (const auto& r : b.records) {
    b.flops += r.flops;
    b.params += r.params;
    b.latency_us += r.latency_us;
  }
}

// Extreme completion under a per-(edge, op) cost summed over all cells.
template <typename Cost>
CellArch pick_completion(const SupernetState& st, const MacroConfig& m, bool maximize,
                         Cost&& cost) {
  std::array<OpKind, kNumEdges> ops{};
  for (int e = 0; e < kNumEdges; ++e) {
    bool first = true;
    double best = 0.0;
    for (OpKind op : st.ops(e)) {
      double sum = 0.0;
      for (int s = 0; s < MacroConfig::kStages; ++s)
        for (int c = 0; c < m.cells_per_stage; ++c) sum += cost(cell_unit(m, s, c, e, op));
      if (first || (maximize ? sum > best : sum < best)) {
        best = sum;
        ops[e] = op;
        first = false;
      }
    }
  }
  return CellArch(ops);
}

}  // namespace

CostBreakdown count_flops(const CellArch& arch, const MacroConfig& macro) {
  auto b = build_breakdown(macro, [&](int e) { return std::vector<OpKind>{arch.op(e)}; });
  total(b);
  return b;
}

CostBreakdown expected_cost(const SupernetState& state, const MacroConfig& macro,
                            const LatencyTable* table) {
  auto b = build_breakdown(macro, [&](int e) { return state.ops(e); });
  if (table) add_latency(b, *table);
  total(b);
  return b;
}

CostBreakdown estimate_latency(const CellArch& arch, const MacroConfig& macro,
                               const LatencyTable& table) {
  auto b = build_breakdown(macro, [&](int e) { return std::vector<OpKind>{arch.op(e)}; });
  add_latency(b, table);
  total(b);
  return b;
}

CellArch extreme_completion(const SupernetState& state, const MacroConfig& macro,
                            const LatencyTable* table, CostMetric metric, bool maximize) {
  macro.validate();
  if (metric == CostMetric::kFlops)
    return pick_completion(state, macro, maximize,
                           [](const CostRecord& r) { return r.flops; });
  if (!table) fail(ErrorKind::kLut, "latency metric requested without a latency table");
  return pick_completion(state, macro, maximize,
                         [&](const CostRecord& r) { return table->lookup(r.key); });
}

double min_completion_latency(const SupernetState& state, const MacroConfig& macro,
                              const LatencyTable& table) {
  auto arch = extreme_completion(state, macro, &table, CostMetric::kLatency, false);
  return estimate_latency(arch, macro, table).latency_us;
}

double min_completion_flops(const SupernetState& state, const MacroConfig& macro) {
  auto arch = extreme_completion(state, macro, nullptr, CostMetric::kFlops, false);
  return count_flops(arch, macro).flops;
}

}  // namespace zsnas
