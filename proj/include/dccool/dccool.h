// Copyright 2026 The dccool Authors
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

#ifndef DCCOOL_DCCOOL_H_
#define DCCOOL_DCCOOL_H_

/* C interface to the dccool library. All handles are opaque. Functions
 * return a dccool_status; on failure dccool_last_error() describes the
 * problem for the calling thread. Strings returned through char** are owned
 * by the caller and released with dccool_string_free. */

#include <stddef.h>

#if defined(_WIN32)
#if defined(DCCOOL_BUILDING_LIBRARY)
#define DCCOOL_API __declspec(dllexport)
#else
#define DCCOOL_API __declspec(dllimport)
#endif
#else
#define DCCOOL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dccool_status {
  DCCOOL_OK = 0,
  DCCOOL_ERR_RUNTIME = 1,
  DCCOOL_ERR_CONFIG = 2,
  DCCOOL_ERR_IO = 3,
  DCCOOL_ERR_ARGUMENT = 4,
  DCCOOL_ERR_DATA = 5
} dccool_status;

typedef struct dccool_config dccool_config;
typedef struct dccool_network dccool_network;
typedef struct dccool_policy dccool_policy;

/* Receives one progress line during long commands. */
typedef void (*dccool_progress_fn)(const char* line, void* user);

DCCOOL_API const char* dccool_version(void);
/* Message of the last failed call on this thread, "" if none. */
DCCOOL_API const char* dccool_last_error(void);
DCCOOL_API void dccool_string_free(char* s);

/* Configuration */
DCCOOL_API dccool_status dccool_config_default(dccool_config** out);
DCCOOL_API dccool_status dccool_config_load(const char* path, dccool_config** out);
/* Sets one field addressed by a JSON pointer ("/train/max_epoch") to a JSON
 * value ("50"). Unknown keys and wrong types are rejected and leave the
 * config unchanged; range checks run when a command starts. */
DCCOOL_API dccool_status dccool_config_set(dccool_config* cfg, const char* pointer,
                                           const char* json_value);
DCCOOL_API dccool_status dccool_config_set_output_dir(dccool_config* cfg, const char* dir);
DCCOOL_API dccool_status dccool_config_to_json(const dccool_config* cfg, char** out);
DCCOOL_API dccool_status dccool_config_save(const dccool_config* cfg, const char* path);
DCCOOL_API void dccool_config_free(dccool_config* cfg);

/* Commands. summary_json may be NULL. */
DCCOOL_API dccool_status dccool_generate_trace(const dccool_config* cfg, char** summary_json);
DCCOOL_API dccool_status dccool_train(const dccool_config* cfg, dccool_progress_fn progress,
                                      void* user, char** summary_json);
/* controller: "cca", "ts" or "fixed". */
DCCOOL_API dccool_status dccool_evaluate(const dccool_config* cfg, const char* controller,
                                         char** summary_json);
DCCOOL_API dccool_status dccool_compare(const dccool_config* cfg, size_t runs,
                                        dccool_progress_fn progress, void* user,
                                        char** summary_json);
/* parameter: "lambda" or "tau". */
DCCOOL_API dccool_status dccool_sweep(const dccool_config* cfg, const char* parameter,
                                      const double* values, size_t count,
                                      dccool_progress_fn progress, void* user,
                                      char** summary_json);

/* Networks. path may hold a bare network or a critic/actor checkpoint. */
DCCOOL_API dccool_status dccool_network_load(const char* path, dccool_network** out);
DCCOOL_API size_t dccool_network_input_dim(const dccool_network* net);
DCCOOL_API size_t dccool_network_output_dim(const dccool_network* net);
/* Forward pass for `batch` samples stored contiguously, sample after sample. */
DCCOOL_API dccool_status dccool_network_forward(const dccool_network* net, const double* input,
                                                size_t batch, double* output);
DCCOOL_API void dccool_network_free(dccool_network* net);

/* Trained policies (actor checkpoints). */
DCCOOL_API dccool_status dccool_policy_load(const char* path, dccool_policy** out);
DCCOOL_API dccool_status dccool_policy_dims(const dccool_policy* p, size_t* state_dim,
                                            size_t* action_dim, size_t* tau);
/* history holds tau-1 slots, oldest first, each as state then action.
 * action receives action_dim physical set-points clipped to the bounds. */
DCCOOL_API dccool_status dccool_policy_act(const dccool_policy* p, const double* history,
                                           size_t history_len, const double* state,
                                           size_t state_len, double* action, size_t action_len);
DCCOOL_API void dccool_policy_free(dccool_policy* p);

#ifdef __cplusplus
}
#endif

#endif /* DCCOOL_DCCOOL_H_ */
