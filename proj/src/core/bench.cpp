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

#include "zsnas/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "zsnas/error.hpp"
#include "zsnas/parallel.hpp"
#include "zsnas/rng.hpp"

namespace zsnas {

// ---------------------------------------------------------------------------
// Kendall tau

namespace {

std::uint64_t tied_pairs_in_runs(const std::vector<std::size_t>& order,
                                 auto&& equal) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= order.size(); ++i) {
    if (i < order.size() && equal(order[i - 1], order[i])) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Counts pairs i < j with v[i] > v[j]; sorts v.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}

}  // namespace

KendallCounts kendall_counts(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(ErrorKind::kInvalidArgument, "kendall tau: length mismatch (" +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
  if (a.size() < 2) fail(ErrorKind::kInvalidArgument, "kendall tau needs at least 2 pairs");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::isnan(a[i]) || std::isnan(b[i]))
      fail(ErrorKind::kInvalidArgument, "kendall tau: NaN input");

  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
  });
  const std::uint64_t a_ties =
      tied_pairs_in_runs(order, [&](std::size_t i, std::size_t j) { return a[i] == a[j]; });
  const std::uint64_t joint_ties = tied_pairs_in_runs(
      order, [&](std::size_t i, std::size_t j) { return a[i] == a[j] && b[i] == b[j]; });

  std::vector<std::size_t> by_b(n);
  std::iota(by_b.begin(), by_b.end(), 0);
  std::sort(by_b.begin(), by_b.end(), [&](std::size_t i, std::size_t j) { return b[i] < b[j]; });
  const std::uint64_t b_ties =
      tied_pairs_in_runs(by_b, [&](std::size_t i, std::size_t j) { return b[i] == b[j]; });

  // With pairs ordered by (a, b), a strict inversion of b is exactly a
  // discordant pair.
  std::vector<double> seq(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = b[order[i]];
  const std::uint64_t discordant = count_inversions(seq, buf, 0, n);

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  KendallCounts c;
  c.discordant = discordant;
  c.ties_both = joint_ties;
  c.ties_a_only = a_ties - joint_ties;
  c.ties_b_only = b_ties - joint_ties;
  c.concordant = total - a_ties - b_ties + joint_ties - discordant;
  return c;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  const KendallCounts c = kendall_counts(a, b);
  const std::uint64_t not_tied_a = c.concordant + c.discordant + c.ties_b_only;
  const std::uint64_t not_tied_b = c.concordant + c.discordant + c.ties_a_only;
  if (not_tied_a == 0 || not_tied_b == 0)
    fail(ErrorKind::kInvalidArgument, "kendall tau undefined: all values on one side are tied");
  return (static_cast<double>(c.concordant) - static_cast<double>(c.discordant)) /
         std::sqrt(static_cast<double>(not_tied_a) * static_cast<double>(not_tied_b));
}

// ---------------------------------------------------------------------------
// Bench files

namespace {

[[noreturn]] void line_error(const char* what_file, std::size_t line_no, const std::string& what) {
  fail(ErrorKind::kParse,
       std::string(what_file) + " line " + std::to_string(line_no) + ": " + what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

template <typename Fn>
void for_each_json_line(const std::string& text, const char* what_file, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      line_error(what_file, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) line_error(what_file, line_no, "expected a JSON object");
    fn(obj, line_no);
  }
}

}  // namespace

std::vector<BenchRecord> parse_bench(const std::string& text) {
  std::vector<BenchRecord> out;
  std::set<std::string> seen;
  for_each_json_line(text, "bench", [&](const nlohmann::json& obj, std::size_t line_no) {
    if (!obj.contains("arch") || !obj["arch"].is_string())
      line_error("bench", line_no, "missing string field 'arch'");
    if (!obj.contains("accuracy") || !obj["accuracy"].is_number())
      line_error("bench", line_no, "missing numeric field 'accuracy'");
    std::string arch;
    try {
      arch = format_arch(parse_arch(obj["arch"].get<std::string>()));
    } catch (const Error& e) {
      line_error("bench", line_no, e.what());
    }
    const double acc = obj["accuracy"].get<double>();
    if (!(acc >= 0.0 && acc <= 100.0))
      line_error("bench", line_no, "accuracy " + obj["accuracy"].dump() + " outside [0, 100]");
    if (!seen.insert(arch).second) line_error("bench", line_no, "duplicate arch " + arch);
    out.push_back({arch, acc});
  });
  return out;
}

std::vector<BenchRecord> load_bench(const std::filesystem::path& path) {
  return parse_bench(read_file(path));
}

// ---------------------------------------------------------------------------
// Sweeps

const char* proxy_kind_name(ProxyKind p) {
  switch (p) {
    case ProxyKind::kKappa: return "kappa";
    case ProxyKind::kLr: return "lr";
    case ProxyKind::kFlops: return "flops";
    case ProxyKind::kLatency: return "latency";
    case ProxyKind::kCombined: return "combined";
  }
  return "?";
}

std::optional<ProxyKind> proxy_kind_from_name(const std::string& name) {
  for (auto p : {ProxyKind::kKappa, ProxyKind::kLr, ProxyKind::kFlops, ProxyKind::kLatency,
                 ProxyKind::kCombined})
    if (name == proxy_kind_name(p)) return p;
  return std::nullopt;
}

const char* sweep_axis_name(SweepAxis a) {
  return a == SweepAxis::kBatchSize ? "batch_size" : "repeats";
}

std::optional<SweepAxis> sweep_axis_from_name(const std::string& name) {
  if (name == "batch_size" || name == "batch-size" || name == "batch") return SweepAxis::kBatchSize;
  if (name == "repeats") return SweepAxis::kRepeats;
  return std::nullopt;
}

namespace {

// Competition ranks, best = 1, for lower-is-better values.
std::vector<int> ranks_ascending(const std::vector<double>& v) {
  std::vector<int> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int better = 0;
    for (double x : v)
      if (x < v[i]) ++better;
    r[i] = better + 1;
  }
  return r;
}

}  // namespace

std::vector<double> proxy_values(const std::vector<BenchRecord>& records, ProxyKind proxy,
                                 const SearchConfig& cfg, const LatencyTable* table) {
  const bool want_latency =
      proxy == ProxyKind::kLatency || (proxy == ProxyKind::kCombined && cfg.w_latency > 0.0);
  if (want_latency && !table)
    fail(ErrorKind::kLut, "latency proxy requires a latency table");
  ProxyConfig pc = cfg.proxy;
  pc.threads = 1;
  std::vector<StateEvaluation> ev(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    const CellArch arch = parse_arch(records[i].arch);
    StateEvaluation& e = ev[i];
    if (proxy == ProxyKind::kKappa || proxy == ProxyKind::kCombined)
      e.kappa = ntk_kappa(arch, cfg.macro, pc).mean;
    if (proxy == ProxyKind::kLr || proxy == ProxyKind::kCombined)
      e.lr = static_cast<double>(count_linear_regions(arch, cfg.macro, pc));
    if (proxy == ProxyKind::kFlops || proxy == ProxyKind::kCombined)
      e.flops = count_flops(arch, cfg.macro).flops;
    if (want_latency) e.latency = estimate_latency(arch, cfg.macro, *table).latency_us;
  });

  std::vector<double> out(records.size());
  switch (proxy) {
    case ProxyKind::kKappa:
      for (std::size_t i = 0; i < ev.size(); ++i) out[i] = -ev[i].kappa;
      break;
    case ProxyKind::kLr:
      for (std::size_t i = 0; i < ev.size(); ++i) out[i] = ev[i].lr;
      break;
    case ProxyKind::kFlops:
      for (std::size_t i = 0; i < ev.size(); ++i) out[i] = ev[i].flops;
      break;
    case ProxyKind::kLatency:
      for (std::size_t i = 0; i < ev.size(); ++i) out[i] = ev[i].latency;
      break;
    case ProxyKind::kCombined: {
      std::vector<double> k(ev.size()), r(ev.size()), f(ev.size()), l(ev.size());
      for (std::size_t i = 0; i < ev.size(); ++i) {
        k[i] = ev[i].kappa;
        r[i] = -ev[i].lr;
        f[i] = ev[i].flops;
        l[i] = ev[i].latency;
      }
      auto rk = ranks_ascending(k), rr = ranks_ascending(r), rf = ranks_ascending(f),
           rl = ranks_ascending(l);
      for (std::size_t i = 0; i < ev.size(); ++i)
        out[i] = -(cfg.w_kappa * rk[i] + cfg.w_lr * rr[i] + cfg.w_flops * rf[i] +
                   cfg.w_latency * rl[i]);
      break;
    }
  }
  return out;
}

TauReport tau_sweep(const std::vector<BenchRecord>& records, const TauSweepConfig& cfg,
                    const LatencyTable* table) {
  if (records.size() < 2) fail(ErrorKind::kInvalidArgument, "tau sweep needs at least 2 records");
  if (cfg.axis_values.empty()) fail(ErrorKind::kInvalidArgument, "tau sweep needs axis values");

  std::vector<BenchRecord> sample = records;
  if (cfg.sample > 0 && records.size() > cfg.sample) {
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(cfg.search.proxy.seed, "bench-sample"));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(cfg.sample);
    std::sort(idx.begin(), idx.end());
    sample.clear();
    for (std::size_t i : idx) sample.push_back(records[i]);
  }
  std::vector<double> accuracy;
  for (const auto& r : sample) accuracy.push_back(r.accuracy);

  TauReport report;
  report.proxy = proxy_kind_name(cfg.proxy);
  report.axis = sweep_axis_name(cfg.axis);
  report.axis_values = cfg.axis_values;
  report.sample_size = sample.size();
  report.seed = cfg.search.proxy.seed;
  for (int v : cfg.axis_values) {
    SearchConfig sc = cfg.search;
    if (cfg.axis == SweepAxis::kBatchSize)
      sc.proxy.batch_size = v;
    else
      sc.proxy.ntk_repeats = v;
    sc.proxy.validate();
    report.tau.push_back(kendall_tau(proxy_values(sample, cfg.proxy, sc, table), accuracy));
  }
  return report;
}

std::string tau_report_jsonl(const TauReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.tau.size(); ++i) {
    nlohmann::json line = {{"proxy", report.proxy},
                           {"axis", report.axis},
                           {"value", report.axis_values[i]},
                           {"tau", report.tau[i]},
                           {"sample_size", report.sample_size},
                           {"seed", report.seed}};
    out += line.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison table

namespace {

std::string verbatim(const nlohmann::json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace

std::vector<ReportEntry> parse_report_entries(const std::string& text) {
  std::vector<ReportEntry> out;
  for_each_json_line(text, "report", [&](const nlohmann::json& obj, std::size_t line_no) {
    ReportEntry e;
    if (!obj.contains("label") || !obj["label"].is_string())
      line_error("report", line_no, "missing string field 'label'");
    e.label = obj["label"].get<std::string>();
    if (obj.contains("arch") && !obj["arch"].is_null()) {
      if (!obj["arch"].is_string()) line_error("report", line_no, "'arch' must be a string");
      try {
        e.arch = format_arch(parse_arch(obj["arch"].get<std::string>()));
      } catch (const Error& err) {
        line_error("report", line_no, err.what());
      }
    }
    auto passthrough = [&](const char* key) {
      if (!obj.contains(key)) return nlohmann::json();
      const auto& v = obj[key];
      if (!v.is_null() && !v.is_number() && !v.is_string())
        line_error("report", line_no, std::string("'") + key + "' must be a number or string");
      return v;
    };
    e.flops_m = passthrough("flops_m");
    e.params_m = passthrough("params_m");
    e.search_time = passthrough("search_time");
    e.acc = passthrough("acc");
    if (obj.contains("latency_us") && !obj["latency_us"].is_null()) {
      if (!obj["latency_us"].is_number() || obj["latency_us"].get<double>() < 0.0)
        line_error("report", line_no, "'latency_us' must be a non-negative number");
      e.latency_us = obj["latency_us"].get<double>();
    }
    if (obj.contains("baseline")) {
      if (!obj["baseline"].is_boolean()) line_error("report", line_no, "'baseline' must be boolean");
      e.baseline = obj["baseline"].get<bool>();
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<ReportEntry> load_report_entries(const std::filesystem::path& path) {
  return parse_report_entries(read_file(path));
}

std::vector<ReportRow> compare_report(const std::vector<ReportEntry>& entries,
                                      const MacroConfig& macro, const LatencyTable* table) {
  std::vector<ReportRow> rows;
  for (const auto& e : entries) {
    ReportRow row;
    row.label = e.label;
    std::optional<CostBreakdown> cost;
    if (e.arch) {
      const CellArch arch = parse_arch(*e.arch);
      cost = table && !e.latency_us ? estimate_latency(arch, macro, *table)
                                    : count_flops(arch, macro);
    }
    row.flops_m = !e.flops_m.is_null() ? verbatim(e.flops_m)
                  : cost               ? fixed(cost->flops / 1e6, 2)
                                       : "-";
    row.params_m = !e.params_m.is_null() ? verbatim(e.params_m)
                   : cost                ? fixed(cost->params / 1e6, 3)
                                         : "-";
    if (e.latency_us)
      row.latency_us = e.latency_us;
    else if (cost && cost->has_latency)
      row.latency_us = cost->latency_us;
    row.search_time = verbatim(e.search_time);
    row.acc = verbatim(e.acc);
    rows.push_back(std::move(row));
  }

  std::optional<double> base;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].baseline) base = rows[i].latency_us;
  if (!base)
    for (const auto& r : rows)
      if (r.latency_us) {
        base = r.latency_us;
        break;
      }
  for (auto& r : rows)
    r.speedup = base && r.latency_us && *r.latency_us > 0.0
                    ? fixed(*base / *r.latency_us, 2) + "×"
                    : "-";
  return rows;
}

std::string format_report_text(const std::vector<ReportRow>& rows) {
  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"Model", "FLOPs (M)", "Params (M)", "Speedup", "Search Time", "ACC"});
  for (const auto& r : rows)
    cells.push_back({r.label, r.flops_m, r.params_m, r.speedup, r.search_time, r.acc});
  std::array<std::size_t, 6> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], display_width(row[c]));
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < 6; ++c) {
      if (c) line += "  ";
      line += row[c];
      if (c + 1 < 6) line.append(width[c] - display_width(row[c]), ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string format_report_jsonl(const std::vector<ReportRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j = {{"label", r.label},         {"flops_m", r.flops_m},
                        {"params_m", r.params_m},   {"speedup", r.speedup},
                        {"search_time", r.search_time}, {"acc", r.acc}};
    j["latency_us"] = r.latency_us ? nlohmann::json(*r.latency_us) : nlohmann::json();
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace zsnas
