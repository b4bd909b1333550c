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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "zsnas/zsnas.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitLut = 3;
constexpr int kExitInfeasible = 4;

int exit_code(zsnas_status s) {
  switch (s) {
    case ZSNAS_OK: return kExitOk;
    case ZSNAS_ERR_INVALID_ARGUMENT:
    case ZSNAS_ERR_PARSE:
    case ZSNAS_ERR_IO: return kExitInput;
    case ZSNAS_ERR_LUT: return kExitLut;
    case ZSNAS_ERR_INFEASIBLE: return kExitInfeasible;
    default: return kExitFailure;
  }
}

struct CliError {
  int code;
};

void check(zsnas_status s) {
  if (s == ZSNAS_OK) return;
  std::cerr << "error: " << zsnas_status_name(s) << ": " << zsnas_last_error() << "\n";
  throw CliError{exit_code(s)};
}

struct StringDeleter {
  void operator()(char* p) const { zsnas_string_free(p); }
};
using CString = std::unique_ptr<char, StringDeleter>;

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Arch = std::unique_ptr<zsnas_arch, HandleDeleter<zsnas_arch, zsnas_arch_free>>;
using Lut = std::unique_ptr<zsnas_lut, HandleDeleter<zsnas_lut, zsnas_lut_free>>;
using Config = std::unique_ptr<zsnas_config, HandleDeleter<zsnas_config, zsnas_config_free>>;

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot write " << out_path << "\n";
    throw CliError{kExitInput};
  }
  f << text;
  if (!text.empty() && text.back() != '\n') f << "\n";
}

void require_file(const std::string& path, const char* what, int code) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    std::cerr << "error: " << what << " not found: " << path << "\n";
    throw CliError{code};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot hardware-aware cell search"};
  app.set_config("--config", "", "Flat key = value settings file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  // Settings forwarded verbatim to zsnas_config_set. Keys equal flag names.
  const std::vector<std::pair<std::string, std::string>> settings = {
      {"seed", "Master random seed"},
      {"threads", "Worker threads (0 = all cores)"},
      {"batch-size", "NTK mini-batch size"},
      {"repeats", "NTK initialisations averaged per score"},
      {"lr-samples", "Inputs drawn for linear-region counting"},
      {"lr-resolution", "Linear-region input shape CxHxW"},
      {"input-source", "NTK inputs: gaussian or image"},
      {"batch-file", "Raw image batch for input-source=image"},
      {"stem-channels", "Stem / first-stage channels"},
      {"cells-per-stage", "Cells per stage"},
      {"num-classes", "Classifier outputs"},
      {"resolution", "Network input shape CxHxW"},
      {"wk", "Weight of the NTK condition-number rank"},
      {"wr", "Weight of the linear-region rank"},
      {"wf", "Weight of the FLOPs rank"},
      {"wl", "Weight of the latency rank"},
      {"latency-budget-us", "Latency budget in microseconds"},
      {"flops-budget", "FLOPs budget"},
      {"schedule", "Pruning schedule: per-edge or global"},
      {"hw-aggregate", "Supernet hardware cost: mean, min or max"},
      {"proxy", "tau: kappa, lr, flops, latency or combined"},
      {"axis", "tau: batch_size or repeats"},
      {"axis-values", "tau: comma-separated axis values"},
      {"sample", "tau: maximum number of benchmark records"},
  };
  std::vector<std::pair<std::string, std::string>> values(settings.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    values[i].first = settings[i].first;
    options.push_back(app.add_option("--" + settings[i].first, values[i].second,
                                     settings[i].second));
  }

  std::string lut_path, out_path, arch_text, bench_path, entries_path;
  app.add_option("--lut", lut_path, "Latency lookup table (CSV)");
  app.add_option("--out", out_path, "Output file (default: stdout)");
  app.add_option("--arch", arch_text, "Cell in |op~0|+|op~0|op~1|+|op~0|op~1|op~2| form");
  app.add_option("--bench", bench_path, "tau: JSON-lines benchmark file");
  app.add_option("--entries", entries_path, "report: JSON-lines comparison entries");

  auto* score = app.add_subcommand("score", "Zero-shot indicators of one cell");
  auto* search = app.add_subcommand("search", "Hardware-aware pruning search");
  auto* enumerate = app.add_subcommand("enumerate", "List every cell of the space");
  auto* flops = app.add_subcommand("flops", "FLOPs and parameter breakdown");
  auto* latency = app.add_subcommand("latency", "Lookup-table latency breakdown");
  auto* tau = app.add_subcommand("tau", "Kendall-tau sweep against benchmark accuracies");
  auto* report = app.add_subcommand("report", "Comparison table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    require_file(lut_path, "latency table", kExitLut);
    require_file(bench_path, "bench file", kExitInput);
    require_file(entries_path, "report entries", kExitInput);

    zsnas_config* raw_cfg = nullptr;
    check(zsnas_config_new(&raw_cfg));
    Config cfg(raw_cfg);
    for (std::size_t i = 0; i < options.size(); ++i)
      if (options[i]->count() > 0)
        check(zsnas_config_set(cfg.get(), values[i].first.c_str(), values[i].second.c_str()));
    if (options[7]->count() > 0) require_file(values[7].second, "batch file", kExitInput);

    Lut lut;
    if (!lut_path.empty()) {
      zsnas_lut* raw = nullptr;
      check(zsnas_lut_load(lut_path.c_str(), &raw));
      lut.reset(raw);
    }
    auto need_arch = [&] {
      if (arch_text.empty()) {
        std::cerr << "error: --arch is required\n";
        throw CliError{kExitInput};
      }
      zsnas_arch* raw = nullptr;
      check(zsnas_arch_parse(arch_text.c_str(), &raw));
      return Arch(raw);
    };

    if (*score) {
      Arch arch = need_arch();
      char* json = nullptr;
      check(zsnas_score(arch.get(), cfg.get(), lut.get(), &json));
      emit(out_path, CString(json).get());
    } else if (*flops) {
      Arch arch = need_arch();
      char* json = nullptr;
      check(zsnas_flops(arch.get(), cfg.get(), &json));
      emit(out_path, CString(json).get());
    } else if (*latency) {
      Arch arch = need_arch();
      if (!lut) {
        std::cerr << "error: latency requires --lut\n";
        return kExitLut;
      }
      char* json = nullptr;
      check(zsnas_latency(arch.get(), cfg.get(), lut.get(), &json));
      emit(out_path, CString(json).get());
    } else if (*enumerate) {
      std::string all;
      for (std::size_t i = 0; i < zsnas_space_size(); ++i) {
        zsnas_arch* raw = nullptr;
        check(zsnas_arch_from_index(i, &raw));
        Arch arch(raw);
        char* s = nullptr;
        check(zsnas_arch_format(arch.get(), &s));
        all += CString(s).get();
        all += '\n';
      }
      emit(out_path, all);
    } else if (*search) {
      char* jsonl = nullptr;
      char* chosen = nullptr;
      double seconds = 0.0;
      check(zsnas_search(cfg.get(), lut.get(), &jsonl, &chosen, &seconds));
      CString jsonl_owned(jsonl), chosen_owned(chosen);
      emit(out_path, jsonl_owned.get());
      std::fprintf(out_path.empty() ? stderr : stdout, "%s\n", chosen_owned.get());
      std::fprintf(stderr, "search finished in %.2f s\n", seconds);
    } else if (*tau) {
      if (bench_path.empty()) {
        std::cerr << "error: tau requires --bench\n";
        return kExitInput;
      }
      char* jsonl = nullptr;
      check(zsnas_tau(cfg.get(), bench_path.c_str(), lut.get(), &jsonl));
      emit(out_path, CString(jsonl).get());
    } else if (*report) {
      if (entries_path.empty()) {
        std::cerr << "error: report requires --entries\n";
        return kExitInput;
      }
      char* text = nullptr;
      char* jsonl = nullptr;
      check(zsnas_report(cfg.get(), entries_path.c_str(), lut.get(), &text, &jsonl));
      CString text_owned(text), jsonl_owned(jsonl);
      if (out_path.empty()) {
        std::cout << text_owned.get();
      } else {
        emit(out_path, jsonl_owned.get());
        std::cout << text_owned.get();
      }
    }
  } catch (const CliError& e) {
    return e.code;
  }
  return kExitOk;
}
