// Copyright 2026 The mwpgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the mwpgen library.
 *
 * Every function returns a status; on failure a message is available from
 * mwpgen_last_error() until the next call on the same thread. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with mwpgen_string_free(). Configurations are passed as JSON
 * documents (see config.hpp for the schema); missing keys take defaults.
 */
#ifndef MWPGEN_H
#define MWPGEN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MWPGEN_API __declspec(dllexport)
#else
#define MWPGEN_API __attribute__((visibility("default")))
#endif

typedef enum mwpgen_status {
  MWPGEN_OK = 0,
  MWPGEN_ERR_CONTRACT = 1,
  MWPGEN_ERR_DIMENSION = 2,
  MWPGEN_ERR_NUMERIC = 3,
  MWPGEN_ERR_SYNTAX = 4,
  MWPGEN_ERR_CONSTRAINT_VIOLATION = 5,
  MWPGEN_ERR_SINGULAR_SYSTEM = 6,
  MWPGEN_ERR_NON_LINEAR = 7,
  MWPGEN_ERR_PARSE = 8,
  MWPGEN_ERR_EMPTY_GRAPH = 9,
  MWPGEN_ERR_TOPIC_NOT_FOUND = 10,
  MWPGEN_ERR_ENTITY_NOT_FOUND = 11,
  MWPGEN_ERR_DISCONNECTED_BINDING = 12,
  MWPGEN_ERR_VOCAB = 13,
  MWPGEN_ERR_MISSING_SLOT = 14,
  MWPGEN_ERR_TEMPLATE_GAP = 15,
  MWPGEN_ERR_IO = 16,
  MWPGEN_ERR_CONFIG = 17,
  MWPGEN_ERR_INTERNAL = 18
} mwpgen_status;

typedef struct mwpgen_model mwpgen_model;

/* Receives one JSON log record per call. */
typedef void (*mwpgen_log_fn)(const char* json_line, void* user);

MWPGEN_API const char* mwpgen_version(void);
MWPGEN_API const char* mwpgen_status_name(mwpgen_status status);
MWPGEN_API const char* mwpgen_last_error(void);
MWPGEN_API void mwpgen_string_free(char* s);

/* Fills defaults into a (possibly partial or empty) config and validates it. */
MWPGEN_API mwpgen_status mwpgen_config_normalize(const char* config_json, char** out_json);

/* Solves "eq1; eq2"; result {"x": "...", "y": "...", "positive": b, "integral": b, "shape": "..."}. */
MWPGEN_API mwpgen_status mwpgen_solve(const char* equations, char** out_json);

/* Writes train/dev/test .jsonl under paths.data_dir; returns summary statistics. */
MWPGEN_API mwpgen_status mwpgen_synth(const char* config_json, char** out_summary_json);

/* Trains on paths.data_dir/train.jsonl (dev.jsonl when present) and writes
 * checkpoints under paths.checkpoint. log may be NULL. */
MWPGEN_API mwpgen_status mwpgen_train(const char* config_json, mwpgen_log_fn log, void* user,
                                      char** out_summary_json);

/* Loads a model directory, or the "best" (else "last") model inside a training output directory. */
MWPGEN_API mwpgen_status mwpgen_model_load(const char* path, mwpgen_model** out_model);
MWPGEN_API void mwpgen_model_free(mwpgen_model* model);

/* Result {"solution": {...}, "outputs": [{"text", "delexicalized", "score"}, ...]}. */
MWPGEN_API mwpgen_status mwpgen_generate(mwpgen_model* model, const char* equations, const char* topic,
                                         const char* bind_x, const char* bind_y, int samples, uint64_t seed,
                                         int beam, int max_len, char** out_json);

/* Parallel .jsonl files. Prediction lines carry "text" or "samples" (four
 * samples enable Self-BLEU); reference lines carry "text" or "references". */
MWPGEN_API mwpgen_status mwpgen_evaluate(const char* predictions_path, const char* references_path,
                                         char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* MWPGEN_H */
