// Copyright 2026 The qcoord Authors
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

/* Stable C interface to the qcoord library.
 *
 * Every function returns a qc_status. On failure qc_last_error() holds a
 * message for the calling thread until its next qcoord call. Strings
 * returned through char** outputs are owned by the caller and released
 * with qc_string_free.
 *
 * Run functions take a JSON object with the run configuration; unknown keys
 * or wrongly typed values are rejected with QC_INVALID_ARGUMENT before any
 * work starts. Results come back as JSON text. */

#ifndef QCOORD_QCOORD_H_
#define QCOORD_QCOORD_H_

#include <stddef.h>

#if defined(_WIN32)
#define QC_API __declspec(dllexport)
#else
#define QC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qc_status {
  QC_OK = 0,
  QC_INVALID_ARGUMENT = 1,
  QC_DIMENSION_MISMATCH = 2,
  QC_ILL_CONDITIONED = 3,
  QC_SATURATION = 4,
  QC_INTEGRITY = 5,
  QC_BUDGET_EXCEEDED = 6,
  QC_LP_FAILURE = 7,
  QC_DIVERGENCE = 8,
  QC_IO = 9,
  QC_INTERNAL = 10
} qc_status;

typedef struct qc_game qc_game;
typedef struct qc_policy qc_policy;

/* Receives one JSON object per progress event; may be NULL. */
typedef void (*qc_progress_fn)(const char* event_json, void* user);

QC_API const char* qc_version(void);
QC_API const char* qc_last_error(void);
QC_API const char* qc_status_name(qc_status status);
QC_API void qc_string_free(char* s);

/* Games: "chsh", "ghz", "rendezvous-tetra", "rendezvous-cube" or
 * "rendezvous:<edge list path>". answers is "edge-index" (NULL) or "destination". */
QC_API qc_status qc_game_create(const char* name, const char* answers, qc_game** out);
QC_API void qc_game_free(qc_game* game);
QC_API qc_status qc_game_classical_optimum(const qc_game* game, double* value);
/* NaN when no reference value is known. */
QC_API qc_status qc_game_quantum_reference(const qc_game* game, double* value);
/* JSON array of the registered game names. */
QC_API qc_status qc_game_names(char** json);

/* Policies loaded from checkpoints of any kind. */
QC_API qc_status qc_policy_load(const char* path, qc_policy** out);
QC_API void qc_policy_free(qc_policy* policy);
/* "entangled-game" or "router-policy". */
QC_API qc_status qc_policy_kind(const qc_policy* policy, const char** kind);
QC_API qc_status qc_policy_save(const qc_policy* policy, const char* path);
/* Exact win probability of a game checkpoint. In this and the two functions
 * below a NULL game means the game recorded in the checkpoint. */
QC_API qc_status qc_policy_win_probability(const qc_policy* policy, const qc_game* game, double* value);
/* Polytope membership certificate as JSON (verdict, violation, coefficients or weights). */
QC_API qc_status qc_policy_bell_check(const qc_policy* policy, const qc_game* game, char** json);
/* Game checkpoints: win probability, classical optimum, advantage, non-signaling.
 * Router checkpoints: queue evaluation; config keys episodes, steps, seed. */
QC_API qc_status qc_policy_evaluate(const qc_policy* policy, const qc_game* game, const char* config_json,
                                    char** json);
/* Exact joint distribution table as CSV (h..., a..., probability). Game checkpoints only. */
QC_API qc_status qc_policy_table_csv(const qc_policy* policy, char** csv);

/* Runs. The "out" key names the output directory (omitted: nothing written). */
QC_API qc_status qc_train_game(const char* config_json, qc_progress_fn progress, void* user, char** result_json);
QC_API qc_status qc_train_queueing(const char* config_json, qc_progress_fn progress, void* user, char** result_json);
QC_API qc_status qc_reproduce_table1(const char* config_json, qc_progress_fn progress, void* user,
                                     char** result_json);
QC_API qc_status qc_compare_coordinators(const char* config_json, qc_progress_fn progress, void* user,
                                         char** result_json);

/* JSON object with the accepted keys and defaults of a run kind:
 * "train-game", "train-queueing", "reproduce-table1", "compare-coordinators". */
QC_API qc_status qc_config_defaults(const char* command, char** json);

#ifdef __cplusplus
}
#endif

#endif /* QCOORD_QCOORD_H_ */
