/**
 * Copyright 2026 The KGUF Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef KGUF_H_
#define KGUF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KGUF_API __declspec(dllexport)
#else
#define KGUF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kguf_status {
  KGUF_OK = 0,
  KGUF_ERR_INVALID_ARGUMENT = 1,
  KGUF_ERR_IO = 2,
  KGUF_ERR_PARSE = 3,
  KGUF_ERR_EMPTY_CORE = 4,
  KGUF_ERR_NUMERIC = 5,
  KGUF_ERR_MISMATCH = 6,
  KGUF_ERR_INTERNAL = 7
} kguf_status;

typedef struct kguf_config kguf_config;
typedef struct kguf_model kguf_model;

KGUF_API const char* kguf_version(void);

/* Message of the last failed call on this thread; "" if none. */
KGUF_API const char* kguf_last_error(void);

/* 0 errors only, 1 warnings (default), 2 progress, 3 debug. */
KGUF_API void kguf_set_verbosity(int level);

/*
 * String outputs use caller buffers. *needed receives the full length
 * including the terminator; the call fails with KGUF_ERR_INVALID_ARGUMENT
 * when cap is too small (buf may be NULL when cap is 0).
 */

/* preset may be NULL for the defaults. */
KGUF_API kguf_status kguf_config_new(const char* preset, kguf_config** out);
KGUF_API kguf_status kguf_config_load(const char* path, kguf_config** out);
KGUF_API kguf_status kguf_config_clone(const kguf_config* cfg, kguf_config** out);
KGUF_API void kguf_config_free(kguf_config* cfg);
KGUF_API kguf_status kguf_config_set(kguf_config* cfg, const char* key, const char* value);
KGUF_API kguf_status kguf_config_get(const kguf_config* cfg, const char* key, char* buf,
                                     size_t cap, size_t* needed);
KGUF_API kguf_status kguf_config_dump(const kguf_config* cfg, char* buf, size_t cap,
                                      size_t* needed);
KGUF_API kguf_status kguf_config_save(const kguf_config* cfg, const char* path);
/* 16 hex digits plus terminator. */
KGUF_API kguf_status kguf_config_hash(const kguf_config* cfg, char out[17]);
/* Newline-separated preset names. */
KGUF_API kguf_status kguf_preset_names(char* buf, size_t cap, size_t* needed);
/* <output_dir>/<hash>-<timestamp>; the directory is not created. */
KGUF_API kguf_status kguf_default_run_dir(const kguf_config* cfg, char* buf, size_t cap,
                                          size_t* needed);

typedef struct kguf_preprocess_stats {
  uint64_t raw;
  uint64_t binarized;
  uint64_t deduplicated;
  uint64_t cored;
  uint64_t users;
  uint64_t items;
  uint64_t train;
  uint64_t val;
  uint64_t test;
  uint64_t repaired;
} kguf_preprocess_stats;

typedef struct kguf_tree_stats {
  uint64_t users_with_tree;
  uint64_t num_features;
  uint64_t selected_features;
  double empty_item_fraction;
  double mean_item_features;
  double mean_tree_depth;
} kguf_tree_stats;

typedef struct kguf_train_stats {
  uint64_t epochs;
  uint64_t best_epoch;
  double initial_val_ndcg;
  double best_val_ndcg;
  int resumed;
} kguf_train_stats;

typedef struct kguf_metrics {
  double ndcg;
  double hr;
  double recall;
  uint64_t users;
} kguf_metrics;

typedef struct kguf_eval_report {
  uint64_t k;
  kguf_metrics val;
  kguf_metrics test;
} kguf_eval_report;

typedef struct kguf_sweep_result {
  uint64_t trials_total;
  uint64_t trials_run;
  uint64_t best_trial;
  double best_val_ndcg;
  kguf_metrics best_test;
} kguf_sweep_result;

/* Stats pointers may be NULL. Optional paths may be NULL for defaults. */
KGUF_API kguf_status kguf_preprocess(const kguf_config* cfg, const char* run_dir,
                                     kguf_preprocess_stats* stats);
KGUF_API kguf_status kguf_build_trees(const kguf_config* cfg, const char* run_dir,
                                      const char* out_dir, kguf_tree_stats* stats);
/* preset: "eta", "depth" or "seeds"; *outputs receives the number of tree sets. */
KGUF_API kguf_status kguf_build_trees_preset(const kguf_config* cfg, const char* run_dir,
                                             const char* preset, size_t* outputs);
KGUF_API kguf_status kguf_train(const kguf_config* cfg, const char* run_dir,
                                const char* trees_dir, const char* out_dir, int resume,
                                kguf_train_stats* stats);
KGUF_API kguf_status kguf_evaluate(const kguf_config* cfg, const char* run_dir,
                                   const char* checkpoint, const char* report_path,
                                   kguf_eval_report* report);
/* trials = 0 uses the configured count. */
KGUF_API kguf_status kguf_sweep(const kguf_config* cfg, const char* run_dir, uint64_t trials,
                                kguf_sweep_result* result);
/* Writes <run_dir>/ablation/<preset>.tsv; *rows receives its row count. */
KGUF_API kguf_status kguf_ablate(const kguf_config* cfg, const char* run_dir,
                                 const char* preset, size_t* rows);
KGUF_API kguf_status kguf_run_all(const kguf_config* cfg, const char* run_dir,
                                  kguf_eval_report* report);

KGUF_API kguf_status kguf_generate_toy(const char* dir, uint64_t seed);

/* Loads a trained checkpoint for scoring. checkpoint may be NULL for
   <run_dir>/train/checkpoint. */
KGUF_API kguf_status kguf_model_load(const kguf_config* cfg, const char* run_dir,
                                     const char* checkpoint, kguf_model** out);
KGUF_API void kguf_model_free(kguf_model* model);
KGUF_API uint64_t kguf_model_num_users(const kguf_model* model);
KGUF_API uint64_t kguf_model_num_items(const kguf_model* model);
KGUF_API uint64_t kguf_model_dim(const kguf_model* model);
/* NULL when out of range. The pointer lives as long as the model. */
KGUF_API const char* kguf_model_item_id(const kguf_model* model, uint64_t index);
KGUF_API const char* kguf_model_user_id(const kguf_model* model, uint64_t index);
KGUF_API kguf_status kguf_model_score(const kguf_model* model, const char* user_id,
                                      const char* item_id, double* score);
/* Top-k unseen items (train items excluded). items/scores hold k entries;
   *count receives how many were filled. */
KGUF_API kguf_status kguf_model_recommend(const kguf_model* model, const char* user_id,
                                          size_t k, uint64_t* items, double* scores,
                                          size_t* count);

#ifdef __cplusplus
}
#endif

#endif  // KGUF_H_
