// Copyright 2026 The lutcomp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the lutcomp library.
//
// Every function returns a lutcomp_status. On failure a message describing
// the error is available from lutcomp_last_error() on the calling thread
// until the next call into the library. Strings returned through `char**`
// out-parameters are owned by the caller and released with
// lutcomp_free_string(). Configurations and results cross the boundary as
// JSON text.

#ifndef LUTCOMP_LUTCOMP_H_
#define LUTCOMP_LUTCOMP_H_

#include <stdint.h>

#if defined(LUTCOMP_BUILDING_LIBRARY)
#define LUTCOMP_API __attribute__((visibility("default")))
#else
#define LUTCOMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lutcomp_status {
  LUTCOMP_OK = 0,
  LUTCOMP_INVALID_ARGUMENT = 1,
  LUTCOMP_PARSE_ERROR = 2,
  LUTCOMP_IO_ERROR = 3,
  LUTCOMP_FORMAT_ERROR = 4,
  LUTCOMP_CHECKSUM_ERROR = 5,
  LUTCOMP_VERSION_ERROR = 6,
  LUTCOMP_NUMERIC_ERROR = 7,
  LUTCOMP_INTERNAL_ERROR = 8,
} lutcomp_status;

typedef struct lutcomp_taskset lutcomp_taskset;
typedef struct lutcomp_model lutcomp_model;

LUTCOMP_API const char* lutcomp_version(void);
LUTCOMP_API const char* lutcomp_rng_version(void);
LUTCOMP_API const char* lutcomp_last_error(void);
LUTCOMP_API void lutcomp_free_string(char* s);

// Derives the seed of a named stream from a master seed.
LUTCOMP_API uint64_t lutcomp_derive_seed(uint64_t master, const char* name,
                                         uint64_t index);

// Task sets: 8 random 3-bit tables, their 64 pairwise compositions and the
// held-out split (2 inputs per composed task).
LUTCOMP_API lutcomp_status lutcomp_taskset_generate(uint64_t seed,
                                                    lutcomp_taskset** out);
LUTCOMP_API lutcomp_status lutcomp_taskset_load(const char* path,
                                                lutcomp_taskset** out);
LUTCOMP_API lutcomp_status lutcomp_taskset_save(const lutcomp_taskset* set,
                                                const char* path);
LUTCOMP_API lutcomp_status lutcomp_taskset_to_json(const lutcomp_taskset* set,
                                                   char** json);
LUTCOMP_API lutcomp_status lutcomp_taskset_hash(const lutcomp_taskset* set,
                                                char** hash);
LUTCOMP_API void lutcomp_taskset_free(lutcomp_taskset* set);

// The reference automaton's answer to `prompt`, e.g. "PCgc:001.".
LUTCOMP_API lutcomp_status lutcomp_oracle_answer(const lutcomp_taskset* set,
                                                 const char* prompt,
                                                 char** answer);
// Tab-separated per-step state trace of the automaton on `prompt`.
LUTCOMP_API lutcomp_status lutcomp_oracle_trace(const lutcomp_taskset* set,
                                                const char* prompt,
                                                char** trace);

// Trains one network. `config_json` is a training configuration (see
// README); missing keys take their defaults. `record_json` receives the run
// record. When `log_path` is non-NULL, progress records are written to it
// as newline-delimited JSON.
LUTCOMP_API lutcomp_status lutcomp_train(const char* config_json,
                                         const lutcomp_taskset* set,
                                         const char* log_path,
                                         lutcomp_model** model,
                                         char** record_json);
LUTCOMP_API lutcomp_status lutcomp_model_load(const char* path,
                                              lutcomp_model** out);
LUTCOMP_API lutcomp_status lutcomp_model_save(const lutcomp_model* model,
                                              const char* path);
// Metadata stored with the model (config, run record) as JSON.
LUTCOMP_API lutcomp_status lutcomp_model_meta(const lutcomp_model* model,
                                              char** json);
LUTCOMP_API void lutcomp_model_free(lutcomp_model* model);

// Free-running answer of the network to `prompt`.
LUTCOMP_API lutcomp_status lutcomp_model_answer(const lutcomp_model* model,
                                                const char* prompt,
                                                char** answer);

typedef enum lutcomp_eval_kind {
  LUTCOMP_EVAL_ZERO_SHOT = 0,   // the 128 held-out items
  LUTCOMP_EVAL_EXHAUSTIVE = 1,  // all 576 (task, input) pairs
} lutcomp_eval_kind;

// Evaluation report as JSON, with per-item detail. Zero-shot prompts follow
// the model's training variant (obfuscated codes, withheld tasks).
LUTCOMP_API lutcomp_status lutcomp_evaluate(const lutcomp_model* model,
                                            const lutcomp_taskset* set,
                                            lutcomp_eval_kind kind,
                                            char** report_json);

// Monte-Carlo chance baselines, "random_output" or "random_wellformed".
LUTCOMP_API lutcomp_status lutcomp_baseline(const lutcomp_taskset* set,
                                            const char* kind, uint64_t trials,
                                            uint64_t seed, char** result_json);

// Runs (or resumes) a search; results go to `results_path` as
// newline-delimited JSON.
LUTCOMP_API lutcomp_status lutcomp_search(const char* search_config_json,
                                          const lutcomp_taskset* set,
                                          const char* results_path);

// Aggregates a results file into <out_prefix>.csv, .svg and .json.
LUTCOMP_API lutcomp_status lutcomp_report(const char* results_path,
                                          double bin_width,
                                          const char* out_prefix,
                                          char** summary_json);

// Overlays two results files of the same variant.
LUTCOMP_API lutcomp_status lutcomp_compare(const char* results_a,
                                           const char* results_b,
                                           double bin_width,
                                           const char* out_prefix,
                                           char** comparison_json);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // LUTCOMP_LUTCOMP_H_
