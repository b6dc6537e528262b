/*
 * Copyright 2026 The Clime Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the clime workbench. Every function returns a clime_status;
 * on failure clime_last_error() describes the problem on the calling thread.
 * Strings returned through char** outputs are owned by the caller and must be
 * released with clime_string_free(). */

#ifndef CLIME_CLIME_H_
#define CLIME_CLIME_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CLIME_BUILDING_LIBRARY)
#define CLIME_API __attribute__((visibility("default")))
#else
#define CLIME_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clime_status {
  CLIME_OK = 0,
  CLIME_E_INVALID_ARGUMENT = 1,
  CLIME_E_NOT_FOUND = 2,
  CLIME_E_CONFLICT = 3,
  CLIME_E_FORMAT = 4,
  CLIME_E_IO = 5,
  CLIME_E_NUMERIC = 6,
  CLIME_E_INTERNAL = 7
} clime_status;

typedef struct clime_workspace clime_workspace;
typedef struct clime_service clime_service;
typedef struct clime_server clime_server;

CLIME_API const char* clime_version(void);
CLIME_API const char* clime_status_name(clime_status status);
CLIME_API const char* clime_last_error(void);
CLIME_API void clime_string_free(char* s);

/* Writes a synthetic bilingual task and its workspace manifest into out_dir.
 * spec_json overrides generator defaults and may be NULL. */
CLIME_API clime_status clime_synth(const char* spec_json, const char* out_dir,
                                   char** manifest_json);

/* Workspaces. clime_workspace_create writes manifest_json (a workspace
 * manifest; paths relative to dir) into dir, then opens it. */
CLIME_API clime_status clime_workspace_open(const char* dir, clime_workspace** out);
CLIME_API clime_status clime_workspace_create(const char* dir, const char* manifest_json,
                                              clime_workspace** out);
CLIME_API void clime_workspace_free(clime_workspace* ws);
CLIME_API clime_status clime_workspace_info(const clime_workspace* ws, char** info_json);

/* Trains the workspace classifier on current embeddings and stores it.
 * config_json: {"seed", "epochs", ...} overrides, may be NULL. */
CLIME_API clime_status clime_train(clime_workspace* ws, const char* config_json,
                                   char** result_json);

/* Keyword ranking as TSV lines "rank\tword\tsalience\tdf" (no header). */
CLIME_API clime_status clime_rank(const clime_workspace* ws, size_t top, char** tsv);

/* Refines current embeddings with a feedback file. If out_path ends in
 * ".vec", writes <stem>.<lang>.vec per language and <stem>.trace.tsv next to
 * it; otherwise out_path is a directory receiving <lang>.vec and trace.tsv.
 * out_path may be NULL. If install is nonzero the result also becomes the
 * workspace's current matrix. */
CLIME_API clime_status clime_refine(clime_workspace* ws, const char* feedback_path,
                                    double lambda, int steps, const char* out_path, int install,
                                    char** result_json);

/* Uncertainty sampling. pool_path may be NULL to use the workspace pool.
 * Returns a JSON array of {"rank", "id", "lang", "text", "entropy", "p1"}. */
CLIME_API clime_status clime_active(const clime_workspace* ws, const char* pool_path, size_t n,
                                    char** selection_json);

/* Four-condition experiment. config_json overrides defaults, may be NULL. */
CLIME_API clime_status clime_eval(const clime_workspace* ws, const char* config_json,
                                  char** report_json, char** summary_tsv);

/* Neighbor movement between original and current embeddings for a feedback
 * file. */
CLIME_API clime_status clime_shift_report(const clime_workspace* ws, const char* feedback_path,
                                          size_t k, char** report_json);

/* Student-t test of samples against mu0: {"t", "df", "p"}. */
CLIME_API clime_status clime_ttest(const double* samples, size_t n, double mu0,
                                   char** result_json);

/* Annotation service. Workspace and session ids are returned as strings. */
CLIME_API clime_status clime_service_new(clime_service** out);
CLIME_API void clime_service_free(clime_service* svc);
CLIME_API clime_status clime_service_open(clime_service* svc, const char* dir,
                                          char** workspace_id);
/* Workspace summary including its session ids. */
CLIME_API clime_status clime_service_workspace(clime_service* svc, const char* workspace_id,
                                               char** info_json);
CLIME_API clime_status clime_session_create(clime_service* svc, const char* workspace_id,
                                            size_t s, size_t k, char** session_id);
/* Replays the create/mark/add_word events of a session log as a new session. */
CLIME_API clime_status clime_session_import(clime_service* svc, const char* workspace_id,
                                            const char* log_path, char** session_id);
CLIME_API clime_status clime_session_json(clime_service* svc, const char* session_id,
                                          char** json);
CLIME_API clime_status clime_session_card(clime_service* svc, const char* session_id,
                                          size_t index, char** json);
CLIME_API clime_status clime_session_feedback(clime_service* svc, const char* session_id,
                                              char** json);
CLIME_API clime_status clime_session_log_path(clime_service* svc, const char* session_id,
                                              char** path);
/* mark: "accept", "reject" or "clear". */
CLIME_API clime_status clime_session_mark(clime_service* svc, const char* session_id,
                                          const char* keyword, const char* word,
                                          const char* lang, const char* mark);
CLIME_API clime_status clime_session_add_word(clime_service* svc, const char* session_id,
                                              const char* keyword, const char* surface,
                                              const char* lang, const char* mark);
CLIME_API clime_status clime_session_oracle(clime_service* svc, const char* session_id);
/* options_json: {"lambda", "steps", "seeds"}, may be NULL. */
CLIME_API clime_status clime_session_finalize(clime_service* svc, const char* session_id,
                                              const char* options_json, char** report_json);
CLIME_API clime_status clime_session_report(clime_service* svc, const char* session_id,
                                            char** report_json);

/* HTTP front end. port 0 binds a free port; the bound port is stored in
 * *bound_port. The service must outlive the server. */
CLIME_API clime_status clime_server_start(clime_service* svc, const char* host, int port,
                                          const char* options_json, clime_server** out,
                                          int* bound_port);
CLIME_API void clime_server_stop(clime_server* server);
CLIME_API void clime_server_free(clime_server* server);

#ifdef __cplusplus
}
#endif

#endif /* CLIME_CLIME_H_ */
