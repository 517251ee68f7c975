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
/* The C API driven from C: config, pipeline, model queries, error paths. */
#define _POSIX_C_SOURCE 200809L
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "kguf.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
              kguf_last_error());                                 \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: capi_smoke <toy data dir>\n");
    return 2;
  }
  char path[4096], run[] = "/tmp/kguf-capi-XXXXXX";
  if (!mkdtemp(run)) return 2;
  kguf_set_verbosity(0);
  EXPECT(strcmp(kguf_version(), "1.0.0") == 0);

  kguf_config* cfg = NULL;
  EXPECT(kguf_config_new("toy", &cfg) == KGUF_OK);
  EXPECT(kguf_config_new("nope", &cfg) == KGUF_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(kguf_last_error()) > 0);
  const char* files[3][2] = {{"paths.interactions", "interactions.tsv"},
                             {"paths.kg", "kg.tsv"},
                             {"paths.linking", "linking.tsv"}};
  for (int k = 0; k < 3; ++k) {
    snprintf(path, sizeof path, "%s/%s", argv[1], files[k][1]);
    EXPECT(kguf_config_set(cfg, files[k][0], path) == KGUF_OK);
  }
  EXPECT(kguf_config_set(cfg, "model.max_epochs", "3") == KGUF_OK);
  EXPECT(kguf_config_set(cfg, "model.bogus", "3") == KGUF_ERR_INVALID_ARGUMENT);

  size_t needed = 0;
  EXPECT(kguf_config_get(cfg, "model.dim", NULL, 0, &needed) == KGUF_ERR_INVALID_ARGUMENT);
  EXPECT(needed == 3);
  char small[8];
  EXPECT(kguf_config_get(cfg, "model.dim", small, sizeof small, &needed) == KGUF_OK);
  EXPECT(strcmp(small, "16") == 0);
  char hash[17];
  EXPECT(kguf_config_hash(cfg, hash) == KGUF_OK);
  EXPECT(strlen(hash) == 16);

  kguf_preprocess_stats pre;
  EXPECT(kguf_preprocess(cfg, run, &pre) == KGUF_OK);
  EXPECT(pre.users == 42 && pre.items == 48);
  kguf_tree_stats trees;
  EXPECT(kguf_build_trees(cfg, run, NULL, &trees) == KGUF_OK);
  EXPECT(trees.selected_features > 0);
  kguf_train_stats train;
  EXPECT(kguf_train(cfg, run, NULL, NULL, 0, &train) == KGUF_OK);
  EXPECT(train.epochs == 3);
  kguf_eval_report rep;
  EXPECT(kguf_evaluate(cfg, run, NULL, NULL, &rep) == KGUF_OK);
  EXPECT(rep.k == 10 && rep.test.users > 0);

  kguf_model* model = NULL;
  EXPECT(kguf_model_load(cfg, run, NULL, &model) == KGUF_OK);
  if (model) {
    EXPECT(kguf_model_num_users(model) == 42);
    EXPECT(kguf_model_dim(model) == 16);
    EXPECT(kguf_model_item_id(model, 1000) == NULL);
    const char* user = kguf_model_user_id(model, 0);
    uint64_t items[5];
    double scores[5];
    size_t count = 0;
    EXPECT(kguf_model_recommend(model, user, 5, items, scores, &count) == KGUF_OK);
    EXPECT(count == 5);
    for (size_t k = 1; k < count; ++k) EXPECT(scores[k - 1] >= scores[k]);
    double s = 0;
    EXPECT(kguf_model_score(model, user, kguf_model_item_id(model, items[0]), &s) == KGUF_OK);
    EXPECT(s == scores[0]);
    EXPECT(kguf_model_score(model, "nobody", "item01", &s) == KGUF_ERR_INVALID_ARGUMENT);
    kguf_model_free(model);
  }

  kguf_config* other = NULL;
  EXPECT(kguf_config_clone(cfg, &other) == KGUF_OK);
  EXPECT(kguf_config_set(other, "model.dim", "4") == KGUF_OK);
  EXPECT(kguf_evaluate(other, run, NULL, NULL, &rep) == KGUF_ERR_MISMATCH);
  EXPECT(kguf_config_set(other, "paths.interactions", "/nonexistent.tsv") == KGUF_OK);
  snprintf(path, sizeof path, "%s/other", run);
  EXPECT(kguf_preprocess(other, path, NULL) == KGUF_ERR_IO);
  kguf_config_free(other);
  kguf_config_free(cfg);

  snprintf(path, sizeof path, "rm -rf '%s'", run);
  if (system(path) != 0) ++failures;
  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("capi smoke ok\n");
  return failures ? 1 : 0;
}
