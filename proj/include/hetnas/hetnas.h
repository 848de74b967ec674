/* Copyright 2026 The HetNAS Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libhetnas.
 *
 * Every fallible call returns a hetnas_status. On failure the message is
 * available from hetnas_last_error() until the next call on the same thread.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function (NULL is accepted). */

#ifndef HETNAS_HETNAS_H_
#define HETNAS_HETNAS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HETNAS_API __declspec(dllexport)
#else
#define HETNAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes. */
typedef enum {
  HETNAS_OK = 0,
  HETNAS_ERR_USAGE = 1,   /* invalid arguments or configuration */
  HETNAS_ERR_RUNTIME = 2  /* failure while executing a valid request */
} hetnas_status;

HETNAS_API const char* hetnas_version(void);
HETNAS_API const char* hetnas_last_error(void);
/* Progress messages on stderr (off by default). */
HETNAS_API void hetnas_set_verbose(int verbose);

/* ---- commands ---------------------------------------------------------- */

/* mode: "homo", "prune", "oneshot" or "layerwise". config_path may be NULL
 * for built-in defaults; scores_csv (oneshot only) may be NULL. overrides are
 * "key.path=value" strings applied to the config. */
HETNAS_API hetnas_status hetnas_cmd_search(const char* mode, const char* config_path, const char* out_dir,
                                           const char* scores_csv, const char* const* overrides,
                                           size_t num_overrides, int force);

HETNAS_API hetnas_status hetnas_cmd_train(const char* spec_path, const char* config_path, const char* out_dir,
                                          const char* const* overrides, size_t num_overrides, int force);

HETNAS_API hetnas_status hetnas_cmd_report(const char* run_dir, int plots);

/* ---- architecture specs ------------------------------------------------ */

typedef struct hetnas_spec hetnas_spec;

HETNAS_API hetnas_status hetnas_spec_load(const char* path, hetnas_spec** out);
HETNAS_API hetnas_status hetnas_spec_parse(const char* yaml_text, hetnas_spec** out);
/* Top-k kinds of a score CSV with `heads` heads split evenly. */
HETNAS_API hetnas_status hetnas_spec_oneshot(const char* scores_csv, size_t heads, size_t k, hetnas_spec** out);
HETNAS_API size_t hetnas_spec_num_layers(const hetnas_spec* spec);
/* Copies a NUL-terminated string into buf (capacity cap). *needed, when not
 * NULL, receives the full length including the NUL; a too-small buffer is a
 * usage error. */
HETNAS_API hetnas_status hetnas_spec_describe(const hetnas_spec* spec, char* buf, size_t cap, size_t* needed);
HETNAS_API hetnas_status hetnas_spec_to_yaml(const hetnas_spec* spec, char* buf, size_t cap, size_t* needed);
HETNAS_API hetnas_status hetnas_spec_save(const hetnas_spec* spec, const char* path);
HETNAS_API void hetnas_spec_free(hetnas_spec* spec);

/* ---- trained models ---------------------------------------------------- */

typedef struct hetnas_model hetnas_model;

HETNAS_API hetnas_status hetnas_model_load(const char* checkpoint_path, hetnas_model** out);
HETNAS_API size_t hetnas_model_num_classes(const hetnas_model* model);
HETNAS_API size_t hetnas_model_max_seq_len(const hetnas_model* model);
/* Class logits of one unpadded token sequence; logits must hold
 * num_classes values. */
HETNAS_API hetnas_status hetnas_model_predict(const hetnas_model* model, const int32_t* tokens, size_t num_tokens,
                                              float* logits, size_t capacity);
HETNAS_API void hetnas_model_free(hetnas_model* model);

#ifdef __cplusplus
}
#endif

#endif /* HETNAS_HETNAS_H_ */
