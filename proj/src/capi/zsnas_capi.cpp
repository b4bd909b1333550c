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

#include "zsnas/zsnas.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <new>
#include <sstream>
#include <string>

#include "zsnas/bench.hpp"
#include "zsnas/error.hpp"
#include "zsnas/hardware.hpp"
#include "zsnas/parallel.hpp"
#include "zsnas/proxies.hpp"
#include "zsnas/search.hpp"
#include "zsnas/search_space.hpp"
#include "zsnas/serialize.hpp"

struct zsnas_arch {
  zsnas::CellArch arch;
};

struct zsnas_lut {
  zsnas::LatencyTable table;
};

struct zsnas_config {
  zsnas::TauSweepConfig sweep;  // sweep.search carries macro, proxy and search settings
  std::string batch_file;
  std::map<std::string, std::string> raw;
};

namespace {

thread_local std::string g_last_error;

zsnas_status to_status(zsnas::ErrorKind kind) {
  switch (kind) {
    case zsnas::ErrorKind::kInvalidArgument: return ZSNAS_ERR_INVALID_ARGUMENT;
    case zsnas::ErrorKind::kParse: return ZSNAS_ERR_PARSE;
    case zsnas::ErrorKind::kLut: return ZSNAS_ERR_LUT;
    case zsnas::ErrorKind::kInfeasible: return ZSNAS_ERR_INFEASIBLE;
    case zsnas::ErrorKind::kNumeric: return ZSNAS_ERR_NUMERIC;
    case zsnas::ErrorKind::kIo: return ZSNAS_ERR_IO;
  }
  return ZSNAS_ERR_INTERNAL;
}

template <typename Fn>
zsnas_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return ZSNAS_OK;
  } catch (const zsnas::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return ZSNAS_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr)
    zsnas::fail(zsnas::ErrorKind::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  zsnas::fail(zsnas::ErrorKind::kInvalidArgument,
              "invalid value '" + value + "' for setting '" + key + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

int parse_positive(const std::string& key, const std::string& value) {
  int v = parse_number<int>(key, value);
  if (v <= 0) bad_value(key, value);
  return v;
}

double parse_weight(const std::string& key, const std::string& value) {
  double v = parse_number<double>(key, value);
  if (!std::isfinite(v) || v < 0.0) bad_value(key, value);
  return v;
}

zsnas::FeatureShape parse_shape(const std::string& key, const std::string& value) {
  int dims[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t x = value.find('x', start);
    if ((i < 2) == (x == std::string::npos)) bad_value(key, value);
    dims[i] = parse_positive(key, value.substr(start, x == std::string::npos ? x : x - start));
    start = x + 1;
  }
  return {dims[0], dims[1], dims[2]};
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = value.find(',', start);
    out.push_back(parse_positive(key, value.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_budget(const std::string& key, const std::string& value) {
  if (value.empty() || value == "none" || value == "inf") return std::nullopt;
  double v = parse_number<double>(key, value);
  if (!(v >= 0.0)) bad_value(key, value);
  return v;
}

void apply_setting(zsnas_config& cfg, const std::string& key, const std::string& value) {
  auto& s = cfg.sweep.search;
  if (key == "seed") {
    s.proxy.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    int t = parse_number<int>(key, value);
    if (t < 0) bad_value(key, value);
    s.threads = t == 0 ? zsnas::default_thread_count() : t;
  } else if (key == "batch-size") {
    s.proxy.batch_size = parse_positive(key, value);
    if (s.proxy.batch_size < 2) bad_value(key, value);
  } else if (key == "repeats") {
    s.proxy.ntk_repeats = parse_positive(key, value);
  } else if (key == "lr-samples") {
    s.proxy.lr_samples = parse_positive(key, value);
  } else if (key == "lr-resolution") {
    s.proxy.lr_input = parse_shape(key, value);
  } else if (key == "input-source") {
    if (value == "gaussian")
      s.proxy.input_source = zsnas::InputSource::kGaussian;
    else if (value == "image")
      s.proxy.input_source = zsnas::InputSource::kImageFile;
    else
      bad_value(key, value);
  } else if (key == "batch-file") {
    cfg.batch_file = value;
  } else if (key == "stem-channels") {
    s.macro.stem_channels = parse_positive(key, value);
  } else if (key == "cells-per-stage") {
    s.macro.cells_per_stage = parse_positive(key, value);
  } else if (key == "num-classes") {
    s.macro.num_classes = parse_positive(key, value);
  } else if (key == "resolution") {
    s.macro.input = parse_shape(key, value);
  } else if (key == "wk") {
    s.w_kappa = parse_weight(key, value);
  } else if (key == "wr") {
    s.w_lr = parse_weight(key, value);
  } else if (key == "wf") {
    s.w_flops = parse_weight(key, value);
  } else if (key == "wl") {
    s.w_latency = parse_weight(key, value);
  } else if (key == "latency-budget-us") {
    s.latency_budget_us = parse_budget(key, value);
  } else if (key == "flops-budget") {
    s.flops_budget = parse_budget(key, value);
  } else if (key == "schedule") {
    if (value == "per-edge")
      s.schedule = zsnas::PruneSchedule::kPerEdge;
    else if (value == "global")
      s.schedule = zsnas::PruneSchedule::kGlobal;
    else
      bad_value(key, value);
  } else if (key == "hw-aggregate") {
    if (value == "mean")
      s.hardware_aggregate = zsnas::HardwareAggregate::kMean;
    else if (value == "min")
      s.hardware_aggregate = zsnas::HardwareAggregate::kMin;
    else if (value == "max")
      s.hardware_aggregate = zsnas::HardwareAggregate::kMax;
    else
      bad_value(key, value);
  } else if (key == "proxy") {
    auto p = zsnas::proxy_kind_from_name(value);
    if (!p) bad_value(key, value);
    cfg.sweep.proxy = *p;
  } else if (key == "axis") {
    auto a = zsnas::sweep_axis_from_name(value);
    if (!a) bad_value(key, value);
    cfg.sweep.axis = *a;
  } else if (key == "axis-values") {
    cfg.sweep.axis_values = parse_int_list(key, value);
  } else if (key == "sample") {
    cfg.sweep.sample = parse_number<std::size_t>(key, value);
  } else {
    zsnas::fail(zsnas::ErrorKind::kInvalidArgument, "unknown setting '" + key + "'");
  }
}

// Settings resolved for a run: the image pool is loaded here so handles stay
// cheap to copy and configure.
zsnas::SearchConfig resolved_search(const zsnas_config& cfg) {
  zsnas::SearchConfig s = cfg.sweep.search;
  s.proxy.threads = s.threads;
  if (s.proxy.input_source == zsnas::InputSource::kImageFile) {
    if (cfg.batch_file.empty())
      zsnas::fail(zsnas::ErrorKind::kInvalidArgument,
                  "input-source=image requires the batch-file setting");
    s.proxy.images = std::make_shared<const zsnas::Tensor>(zsnas::load_image_batch(cfg.batch_file));
  }
  return s;
}

const zsnas::LatencyTable* table_of(const zsnas_lut* lut) {
  return lut ? &lut->table : nullptr;
}

}  // namespace

extern "C" {

const char* zsnas_version(void) { return "1.0.0"; }

const char* zsnas_status_name(zsnas_status status) {
  switch (status) {
    case ZSNAS_OK: return "ok";
    case ZSNAS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ZSNAS_ERR_PARSE: return "parse error";
    case ZSNAS_ERR_LUT: return "latency table error";
    case ZSNAS_ERR_INFEASIBLE: return "infeasible budget";
    case ZSNAS_ERR_NUMERIC: return "numerical error";
    case ZSNAS_ERR_IO: return "i/o error";
    case ZSNAS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* zsnas_last_error(void) { return g_last_error.c_str(); }

void zsnas_string_free(char* s) { std::free(s); }

size_t zsnas_space_size(void) { return zsnas::kSpaceSize; }

zsnas_status zsnas_arch_parse(const char* text, zsnas_arch** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new zsnas_arch{zsnas::parse_arch(text)};
  });
}

zsnas_status zsnas_arch_from_index(size_t index, zsnas_arch** out) {
  return guarded([&] {
    require(out, "out");
    *out = new zsnas_arch{zsnas::CellArch::from_index(index)};
  });
}

zsnas_status zsnas_arch_format(const zsnas_arch* arch, char** out) {
  return guarded([&] {
    require(arch, "arch");
    require(out, "out");
    *out = dup_string(zsnas::format_arch(arch->arch));
  });
}

zsnas_status zsnas_arch_edge_op(const zsnas_arch* arch, int edge, int* op_code) {
  return guarded([&] {
    require(arch, "arch");
    require(op_code, "op_code");
    if (edge < 0 || edge >= zsnas::kNumEdges)
      zsnas::fail(zsnas::ErrorKind::kInvalidArgument, "edge index out of range");
    *op_code = zsnas::op_code(arch->arch.op(edge));
  });
}

void zsnas_arch_free(zsnas_arch* arch) { delete arch; }

zsnas_status zsnas_lut_load(const char* path, zsnas_lut** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new zsnas_lut{zsnas::load_latency_table(path)};
  });
}

zsnas_status zsnas_lut_parse(const char* csv_text, zsnas_lut** out) {
  return guarded([&] {
    require(csv_text, "csv_text");
    require(out, "out");
    *out = new zsnas_lut{zsnas::parse_latency_table(csv_text)};
  });
}

size_t zsnas_lut_size(const zsnas_lut* lut) { return lut ? lut->table.entries().size() : 0; }

double zsnas_lut_overhead_us(const zsnas_lut* lut) { return lut ? lut->table.overhead_us() : 0.0; }

void zsnas_lut_free(zsnas_lut* lut) { delete lut; }

zsnas_status zsnas_config_new(zsnas_config** out) {
  return guarded([&] {
    require(out, "out");
    auto* cfg = new zsnas_config();
    cfg->sweep.search.threads = zsnas::default_thread_count();
    *out = cfg;
  });
}

zsnas_status zsnas_config_set(zsnas_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    zsnas_config next = *cfg;
    apply_setting(next, key, value);
    next.raw[key] = value;
    *cfg = std::move(next);
  });
}

zsnas_status zsnas_config_get(const zsnas_config* cfg, const char* key, char** value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    auto it = cfg->raw.find(key);
    if (it == cfg->raw.end())
      zsnas::fail(zsnas::ErrorKind::kInvalidArgument, std::string("setting '") + key + "' not set");
    *value = dup_string(it->second);
  });
}

void zsnas_config_free(zsnas_config* cfg) { delete cfg; }

zsnas_status zsnas_score(const zsnas_arch* arch, const zsnas_config* cfg, const zsnas_lut* lut,
                         char** json_out) {
  return guarded([&] {
    require(arch, "arch");
    require(cfg, "cfg");
    require(json_out, "json_out");
    auto s = resolved_search(*cfg);
    auto scores = zsnas::score_arch(arch->arch, s.macro, s.proxy, table_of(lut));
    *json_out = dup_string(zsnas::scores_json(arch->arch, scores, s.proxy.seed).dump());
  });
}

zsnas_status zsnas_flops(const zsnas_arch* arch, const zsnas_config* cfg, char** json_out) {
  return guarded([&] {
    require(arch, "arch");
    require(cfg, "cfg");
    require(json_out, "json_out");
    const auto& macro = cfg->sweep.search.macro;
    *json_out = dup_string(
        zsnas::cost_json(arch->arch, zsnas::count_flops(arch->arch, macro)).dump());
  });
}

zsnas_status zsnas_latency(const zsnas_arch* arch, const zsnas_config* cfg, const zsnas_lut* lut,
                           char** json_out) {
  return guarded([&] {
    require(arch, "arch");
    require(cfg, "cfg");
    require(json_out, "json_out");
    if (!lut) zsnas::fail(zsnas::ErrorKind::kLut, "latency estimation requires a latency table");
    const auto& macro = cfg->sweep.search.macro;
    *json_out = dup_string(
        zsnas::cost_json(arch->arch, zsnas::estimate_latency(arch->arch, macro, lut->table))
            .dump());
  });
}

zsnas_status zsnas_search(const zsnas_config* cfg, const zsnas_lut* lut, char** jsonl_out,
                          char** arch_out, double* wall_seconds) {
  return guarded([&] {
    require(cfg, "cfg");
    require(jsonl_out, "jsonl_out");
    auto s = resolved_search(*cfg);
    s.proxy.threads = 1;
    auto report = zsnas::run_search(s, table_of(lut));
    std::string jsonl = zsnas::search_report_jsonl(report, s.proxy.seed);
    std::string arch = zsnas::format_arch(report.chosen);
    char* j = dup_string(jsonl);
    if (arch_out) {
      try {
        *arch_out = dup_string(arch);
      } catch (...) {
        std::free(j);
        throw;
      }
    }
    *jsonl_out = j;
    if (wall_seconds) *wall_seconds = report.wall_seconds;
  });
}

zsnas_status zsnas_tau(const zsnas_config* cfg, const char* bench_path, const zsnas_lut* lut,
                       char** jsonl_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(bench_path, "bench_path");
    require(jsonl_out, "jsonl_out");
    zsnas::TauSweepConfig sweep = cfg->sweep;
    sweep.search = resolved_search(*cfg);
    sweep.search.proxy.threads = 1;
    auto records = zsnas::load_bench(bench_path);
    auto report = zsnas::tau_sweep(records, sweep, table_of(lut));
    *jsonl_out = dup_string(zsnas::tau_report_jsonl(report));
  });
}

zsnas_status zsnas_report(const zsnas_config* cfg, const char* entries_path, const zsnas_lut* lut,
                          char** text_out, char** jsonl_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(entries_path, "entries_path");
    auto entries = zsnas::load_report_entries(entries_path);
    auto rows = zsnas::compare_report(entries, cfg->sweep.search.macro, table_of(lut));
    std::string text = zsnas::format_report_text(rows);
    std::string jsonl = zsnas::format_report_jsonl(rows);
    char* t = text_out ? dup_string(text) : nullptr;
    if (jsonl_out) {
      try {
        *jsonl_out = dup_string(jsonl);
      } catch (...) {
        std::free(t);
        throw;
      }
    }
    if (text_out) *text_out = t;
  });
}

}  // extern "C"
