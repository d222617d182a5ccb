// Copyright 2026 The behavesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the behavesim toolkit.
 *
 * Objects are opaque handles created by *_create / *_load / *_build calls
 * and released with the matching *_free. Every fallible call returns a
 * bsim_status; on failure bsim_last_error() describes the problem for the
 * calling thread. Strings handed out through char** parameters are owned by
 * the caller and released with bsim_string_free. Configuration is passed as
 * JSON objects; unknown keys are rejected.
 */

#ifndef BEHAVESIM_BEHAVESIM_H_
#define BEHAVESIM_BEHAVESIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BSIM_API __declspec(dllexport)
#else
#define BSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsim_status {
  BSIM_OK = 0,
  BSIM_INVALID_ARGUMENT = 1,
  BSIM_IO_ERROR = 2,
  BSIM_UNKNOWN_PLATFORM = 3,
  BSIM_UNKNOWN_BEHAVIOR_TYPE = 4,
  BSIM_FLAG_MISMATCH = 5,
  BSIM_BAD_TIMESTAMP = 6,
  BSIM_MALFORMED_LINE = 7,
  BSIM_EMPTY_TIMELINE = 8,
  BSIM_NO_HISTORY = 9,
  BSIM_POOL_TOO_SMALL = 10,
  BSIM_DUPLICATE_OPTION_TEXT = 11,
  BSIM_INCONSISTENT_QUESTION = 12,
  BSIM_MISSING_FEW_SHOT_EXAMPLES = 13,
  BSIM_BACKEND_EXHAUSTED = 14,
  BSIM_AUTH_ERROR = 15,
  BSIM_OVERSIZE_INPUT = 16,
  BSIM_BACKEND_REJECTED = 17,
  BSIM_UNPARSEABLE = 18,
  BSIM_OUT_OF_RANGE = 19,
  BSIM_MALFORMED_TAGS = 20,
  BSIM_MISSING_SEGMENTS = 21,
  BSIM_MISSING_DECISION = 22,
  BSIM_LEAKAGE_UNFIXABLE = 23,
  BSIM_LENGTH_MISMATCH = 24,
  BSIM_EMBEDDER_UNAVAILABLE = 25,
  BSIM_INCOMPATIBLE_METHOD = 26,
  BSIM_INTERNAL = 27
} bsim_status;

typedef struct bsim_registry bsim_registry;
typedef struct bsim_corpus bsim_corpus;
typedef struct bsim_question_set bsim_question_set;
typedef struct bsim_gateway bsim_gateway;
typedef struct bsim_report bsim_report;

BSIM_API const char* bsim_version(void);
/* Message for the last failed call on this thread; "" if none. */
BSIM_API const char* bsim_last_error(void);
/* Stable name such as "FlagMismatch". */
BSIM_API const char* bsim_status_name(bsim_status status);
BSIM_API void bsim_string_free(char* s);

/* Lower-case hex SHA-256 of a file's bytes. */
BSIM_API bsim_status bsim_sha256_file(const char* path, char** hex_out);

/* ---- behavior registry ---- */

BSIM_API bsim_status bsim_registry_default(bsim_registry** out);
BSIM_API bsim_status bsim_registry_load(const char* path, bsim_registry** out);
BSIM_API bsim_status bsim_registry_serialize(const bsim_registry* registry,
                                             char** tsv_out);
BSIM_API void bsim_registry_free(bsim_registry* registry);

/* ---- timelines ---- */

/* `path` is a .jsonl file or a directory of them. `now` ("YYYY-MM-DD
 * HH:MM:SS", may be NULL for the current time) bounds valid timestamps. */
BSIM_API bsim_status bsim_corpus_load(const bsim_registry* registry,
                                      const char* path, const char* now,
                                      bsim_corpus** out);
/* Keeps the users passing the selection policy
 * {"min_behaviors", "max_behaviors", "min_distinct_types", "platforms"}.
 * `result_json` (may be NULL) receives kept and rejected users. */
BSIM_API bsim_status bsim_corpus_select(bsim_corpus* corpus,
                                        const char* policy_json,
                                        char** result_json);
BSIM_API bsim_status bsim_corpus_write(const bsim_corpus* corpus,
                                       const char* dir);
BSIM_API size_t bsim_corpus_size(const bsim_corpus* corpus);
BSIM_API void bsim_corpus_free(bsim_corpus* corpus);

/* ---- questions ---- */

/* config: {"seed", "window_days", "pool_cap", "tau", "top_k", "embedder":
 * "hashing" | "http", "embed_dim", "embed_base_url", "embed_api_key",
 * "embed_model"}. `stats_json` may be NULL. */
BSIM_API bsim_status bsim_questions_build(const bsim_corpus* corpus,
                                          const bsim_registry* registry,
                                          const char* config_json,
                                          bsim_question_set** out,
                                          char** stats_json);
BSIM_API bsim_status bsim_questions_read(const char* path,
                                         bsim_question_set** out);
BSIM_API bsim_status bsim_questions_write(const bsim_question_set* questions,
                                          const char* path);
/* User-disjoint split. `info_json` (may be NULL) reports the users on each
 * side, the achieved fraction and any warning. */
BSIM_API bsim_status bsim_questions_split(const bsim_question_set* questions,
                                          double train_ratio, uint64_t seed,
                                          bsim_question_set** train,
                                          bsim_question_set** test,
                                          char** info_json);
BSIM_API size_t bsim_questions_size(const bsim_question_set* questions);
/* One question as its JSON line. */
BSIM_API bsim_status bsim_questions_get(const bsim_question_set* questions,
                                        size_t index, char** json_out);
BSIM_API void bsim_questions_free(bsim_question_set* questions);

/* ---- model access ---- */

/* config: {"backend": "mock:<policy>" | "http", "base_url", "api_key",
 * "concurrency", "requests_per_minute", "max_attempts", "base_delay_ms",
 * "max_delay_ms", "jitter_seed", "cache_dir"}. */
BSIM_API bsim_status bsim_gateway_create(const char* config_json,
                                         bsim_gateway** out);
BSIM_API bsim_status bsim_gateway_usage(const bsim_gateway* gateway,
                                        char** usage_json);
BSIM_API void bsim_gateway_free(bsim_gateway* gateway);

/* ---- evaluation ---- */

/* config: {"method", "history_window" (count or "all"), "include_userinfo",
 * "include_interests", "include_history", "tags", "few_shot", "trials",
 * "model", "temperature", "max_output", "seed", "run_label",
 * "templates_dir"}. */
BSIM_API bsim_status bsim_evaluate(const bsim_question_set* questions,
                                   const bsim_corpus* corpus,
                                   bsim_gateway* gateway,
                                   const char* config_json, bsim_report** out);
/* As bsim_evaluate plus "windows": [10, 20, ..., "all"]. */
BSIM_API bsim_status bsim_sweep(const bsim_question_set* questions,
                                const bsim_corpus* corpus,
                                bsim_gateway* gateway, const char* config_json,
                                bsim_report** out);
/* As bsim_evaluate plus "ablations": ["none", "no-history", ...]. */
BSIM_API bsim_status bsim_ablate(const bsim_question_set* questions,
                                 const bsim_corpus* corpus,
                                 bsim_gateway* gateway, const char* config_json,
                                 bsim_report** out);
/* Evaluates once and profiles reasoning similarity against the prompt
 * parts. Extra keys: "buckets". */
BSIM_API bsim_status bsim_analyze_cot(const bsim_question_set* questions,
                                      const bsim_corpus* corpus,
                                      bsim_gateway* gateway,
                                      const char* config_json,
                                      bsim_report** out);

BSIM_API bsim_status bsim_report_load(const char* path, bsim_report** out);
/* Report document: {"kind", "runs": [...]} plus similarity rows. */
BSIM_API bsim_status bsim_report_json(const bsim_report* report, char** out);
BSIM_API bsim_status bsim_report_csv(const bsim_report* report, char** out);
/* Line chart of a sweep; InvalidArgument for other report kinds. */
BSIM_API bsim_status bsim_report_svg(const bsim_report* report, char** out);
/* Per-question predictions of every run, one JSON object per line. */
BSIM_API bsim_status bsim_report_predictions(const bsim_report* report,
                                             char** out);
/* Mean macro-F1 of one cell of the first run; OutOfRange if absent. */
BSIM_API bsim_status bsim_report_cell(const bsim_report* report,
                                      const char* platform, const char* kind,
                                      double* f1_mean, double* accuracy_mean);
BSIM_API void bsim_report_free(bsim_report* report);

/* ---- instruction data ---- */

/* config: {"oracle_model", "reorg_model", "oracle_attempts",
 * "reorganize_attempts", "ngram", "max_overlap", "history_window",
 * "temperature", "max_records", "seed", "run_label", "templates_dir"}.
 * Writes `out_path` and `out_path`.manifest.json; `reject_log` may be NULL.
 * `manifest_json` (may be NULL) receives the manifest. */
BSIM_API bsim_status bsim_forge(const bsim_question_set* questions,
                                const bsim_corpus* corpus,
                                bsim_gateway* gateway, const char* config_json,
                                const char* out_path, const char* reject_log,
                                char** manifest_json);

/* ---- response parsing ---- */

BSIM_API bsim_status bsim_extract_answer(const char* text, size_t n_options,
                                         char* letter_out);
/* {"segments": [{"tag", "text"}], "decision", "letter"} */
BSIM_API bsim_status bsim_parse_segments(const char* text, char** json_out);
/* {"leaked", "trigger", "overlap_fraction"} */
BSIM_API bsim_status bsim_detect_leakage(const char* cot_text,
                                         const char* gold_text,
                                         char gold_letter, size_t ngram,
                                         double max_overlap, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* BEHAVESIM_BEHAVESIM_H_ */
