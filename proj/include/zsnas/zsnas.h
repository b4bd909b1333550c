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

/*
 * C interface to the zsnas library: zero-shot, hardware-aware cell search.
 *
 * All functions return a zsnas_status. On failure a message is available
 * from zsnas_last_error() on the calling thread. Strings returned through
 * char** out-parameters are owned by the caller and released with
 * zsnas_string_free(). Handles are released with their *_free function;
 * passing NULL to any *_free function is a no-op.
 */

#ifndef ZSNAS_ZSNAS_H_
#define ZSNAS_ZSNAS_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(ZSNAS_BUILDING_LIBRARY)
#define ZSNAS_API __declspec(dllexport)
#else
#define ZSNAS_API __declspec(dllimport)
#endif
#else
#define ZSNAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 2, 3 and 4 are also the command-line exit codes. */
typedef enum zsnas_status {
  ZSNAS_OK = 0,
  ZSNAS_ERR_INVALID_ARGUMENT = 1,
  ZSNAS_ERR_PARSE = 2,
  ZSNAS_ERR_LUT = 3,
  ZSNAS_ERR_INFEASIBLE = 4,
  ZSNAS_ERR_NUMERIC = 5,
  ZSNAS_ERR_IO = 6,
  ZSNAS_ERR_INTERNAL = 7
} zsnas_status;

typedef struct zsnas_arch zsnas_arch;
typedef struct zsnas_lut zsnas_lut;
typedef struct zsnas_config zsnas_config;

ZSNAS_API const char* zsnas_version(void);
ZSNAS_API const char* zsnas_status_name(zsnas_status status);
/* Message of the last failed call on this thread ("" if none). */
ZSNAS_API const char* zsnas_last_error(void);
ZSNAS_API void zsnas_string_free(char* s);

/* --- architectures ------------------------------------------------------ */

/* Number of cells in the search space (15625). */
ZSNAS_API size_t zsnas_space_size(void);
ZSNAS_API zsnas_status zsnas_arch_parse(const char* text, zsnas_arch** out);
/* Cell at a position of the lexicographic enumeration. */
ZSNAS_API zsnas_status zsnas_arch_from_index(size_t index, zsnas_arch** out);
ZSNAS_API zsnas_status zsnas_arch_format(const zsnas_arch* arch, char** out);
/* Operator code (0..4) on edge 0..5. */
ZSNAS_API zsnas_status zsnas_arch_edge_op(const zsnas_arch* arch, int edge, int* op_code);
ZSNAS_API void zsnas_arch_free(zsnas_arch* arch);

/* --- latency lookup tables --------------------------------------------- */

ZSNAS_API zsnas_status zsnas_lut_load(const char* path, zsnas_lut** out);
ZSNAS_API zsnas_status zsnas_lut_parse(const char* csv_text, zsnas_lut** out);
ZSNAS_API size_t zsnas_lut_size(const zsnas_lut* lut);
ZSNAS_API double zsnas_lut_overhead_us(const zsnas_lut* lut);
ZSNAS_API void zsnas_lut_free(zsnas_lut* lut);

/* --- configuration ------------------------------------------------------ */

/*
 * Flat key/value settings. Keys mirror the command-line flags:
 *   seed, threads, batch-size, repeats, lr-samples, lr-resolution (CxHxW),
 *   input-source (gaussian|image), batch-file, stem-channels,
 *   cells-per-stage, num-classes, resolution (CxHxW), wk, wr, wf, wl,
 *   latency-budget-us, flops-budget (empty string clears a budget),
 *   schedule (per-edge|global), hw-aggregate (mean|min|max),
 *   proxy (kappa|lr|flops|latency|combined), axis (batch_size|repeats),
 *   axis-values (comma list), sample.
 */
ZSNAS_API zsnas_status zsnas_config_new(zsnas_config** out);
ZSNAS_API zsnas_status zsnas_config_set(zsnas_config* cfg, const char* key, const char* value);
ZSNAS_API zsnas_status zsnas_config_get(const zsnas_config* cfg, const char* key, char** value);
ZSNAS_API void zsnas_config_free(zsnas_config* cfg);

/* --- operations --------------------------------------------------------- */

/* Indicators of one cell as a JSON object; lut may be NULL. */
ZSNAS_API zsnas_status zsnas_score(const zsnas_arch* arch, const zsnas_config* cfg,
                                   const zsnas_lut* lut, char** json_out);
/* FLOPs / parameter breakdown as a JSON object. */
ZSNAS_API zsnas_status zsnas_flops(const zsnas_arch* arch, const zsnas_config* cfg,
                                   char** json_out);
/* Lookup-table latency breakdown as a JSON object. */
ZSNAS_API zsnas_status zsnas_latency(const zsnas_arch* arch, const zsnas_config* cfg,
                                     const zsnas_lut* lut, char** json_out);
/*
 * Pruning search. jsonl_out receives one line per removal plus a final line;
 * arch_out (optional) the chosen cell; wall_seconds (optional) the run time.
 */
ZSNAS_API zsnas_status zsnas_search(const zsnas_config* cfg, const zsnas_lut* lut,
                                    char** jsonl_out, char** arch_out, double* wall_seconds);
/* Kendall-tau sweep of a proxy against a JSON-lines benchmark file. */
ZSNAS_API zsnas_status zsnas_tau(const zsnas_config* cfg, const char* bench_path,
                                 const zsnas_lut* lut, char** jsonl_out);
/* Comparison table from a JSON-lines entry file; both outputs optional. */
ZSNAS_API zsnas_status zsnas_report(const zsnas_config* cfg, const char* entries_path,
                                    const zsnas_lut* lut, char** text_out, char** jsonl_out);

#ifdef __cplusplus
}
#endif

#endif /* ZSNAS_ZSNAS_H_ */
