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
#include "kguf.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "log.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "textio.hpp"
#include "toy.hpp"
#include "treefilter.hpp"

struct kguf_config {
  kguf::config::RunConfig cfg;
};

struct kguf_model {
  kguf::data::InteractionDataset dataset;
  kguf::graph::Embeddings embeddings;
};

namespace {

thread_local std::string last_error;

kguf_status fail_with(kguf_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename F>
kguf_status guarded(F&& fn) {
  try {
    fn();
    last_error.clear();
    return KGUF_OK;
  } catch (const kguf::Error& e) {
    return fail_with(static_cast<kguf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(KGUF_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail_with(KGUF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail_with(KGUF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail_with(KGUF_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) kguf::fail(kguf::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

std::filesystem::path opt_path(const char* p) {
  return (p && *p) ? std::filesystem::path(p) : std::filesystem::path();
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (cap < s.size() + 1)
    kguf::fail(kguf::ErrorCode::kInvalidArgument, "buffer too small");
  need(buf, "buf");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

kguf_metrics to_c(const kguf::pipeline::Metrics& m) { return {m.ndcg, m.hr, m.recall, m.users}; }

kguf_eval_report to_c(const kguf::pipeline::EvalReport& r) { return {r.k, to_c(r.val), to_c(r.test)}; }

}  // namespace

extern "C" {

const char* kguf_version(void) { return kguf::pipeline::kVersion; }

const char* kguf_last_error(void) { return last_error.c_str(); }

void kguf_set_verbosity(int level) { kguf::log::set_verbosity(level); }

kguf_status kguf_config_new(const char* preset, kguf_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new kguf_config{kguf::config::RunConfig::preset(preset ? preset : "default")};
  });
}

kguf_status kguf_config_load(const char* path, kguf_config** out) {
  return guarded([&] {
    need(out, "out");
    need(path, "path");
    *out = new kguf_config{kguf::config::RunConfig::load(path)};
  });
}

kguf_status kguf_config_clone(const kguf_config* cfg, kguf_config** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new kguf_config{cfg->cfg};
  });
}

void kguf_config_free(kguf_config* cfg) { delete cfg; }

kguf_status kguf_config_set(kguf_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

kguf_status kguf_config_get(const kguf_config* cfg, const char* key, char* buf, size_t cap,
                            size_t* needed) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    copy_out(cfg->cfg.get(key), buf, cap, needed);
  });
}

kguf_status kguf_config_dump(const kguf_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "cfg");
    copy_out(cfg->cfg.dump(), buf, cap, needed);
  });
}

kguf_status kguf_config_save(const kguf_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    kguf::text::write_file(path, cfg->cfg.dump());
  });
}

kguf_status kguf_config_hash(const kguf_config* cfg, char out[17]) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    copy_out(cfg->cfg.hash(), out, 17, nullptr);
  });
}

kguf_status kguf_preset_names(char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    std::string s;
    for (const auto& n : kguf::config::RunConfig::preset_names()) s += n + "\n";
    copy_out(s, buf, cap, needed);
  });
}

kguf_status kguf_default_run_dir(const kguf_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "cfg");
    copy_out(kguf::pipeline::default_run_dir(cfg->cfg).string(), buf, cap, needed);
  });
}

kguf_status kguf_preprocess(const kguf_config* cfg, const char* run_dir,
                            kguf_preprocess_stats* stats) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto s = kguf::pipeline::preprocess(cfg->cfg, run_dir);
    if (stats)
      *stats = {s.raw,   s.binarized, s.deduplicated, s.cored, s.users,
                s.items, s.train,     s.val,          s.test,  s.repaired};
  });
}

kguf_status kguf_build_trees(const kguf_config* cfg, const char* run_dir, const char* out_dir,
                             kguf_tree_stats* stats) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto s = kguf::pipeline::build_trees(cfg->cfg, run_dir, opt_path(out_dir));
    if (stats)
      *stats = {s.users_with_tree,     s.num_features,       s.selected_features,
                s.empty_item_fraction, s.mean_item_features, s.mean_tree_depth};
  });
}

kguf_status kguf_build_trees_preset(const kguf_config* cfg, const char* run_dir,
                                    const char* preset, size_t* outputs) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    need(preset, "preset");
    auto v = kguf::pipeline::build_tree_preset(cfg->cfg, run_dir, preset);
    if (outputs) *outputs = v.size();
  });
}

kguf_status kguf_train(const kguf_config* cfg, const char* run_dir, const char* trees_dir,
                       const char* out_dir, int resume, kguf_train_stats* stats) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto s = kguf::pipeline::train(cfg->cfg, run_dir,
                                   {opt_path(trees_dir), opt_path(out_dir), resume != 0});
    if (stats)
      *stats = {s.epochs, s.best_epoch, s.initial_val_ndcg, s.best_val_ndcg, s.resumed ? 1 : 0};
  });
}

kguf_status kguf_evaluate(const kguf_config* cfg, const char* run_dir, const char* checkpoint,
                          const char* report_path, kguf_eval_report* report) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto r = kguf::pipeline::evaluate(cfg->cfg, run_dir, opt_path(checkpoint), opt_path(report_path));
    if (report) *report = to_c(r);
  });
}

kguf_status kguf_sweep(const kguf_config* cfg, const char* run_dir, uint64_t trials,
                       kguf_sweep_result* result) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto r = kguf::pipeline::sweep(cfg->cfg, run_dir, trials);
    if (result)
      *result = {r.trials_total, r.trials_run, r.best.trial, r.best.val_ndcg,
                 to_c(r.best_report.test)};
  });
}

kguf_status kguf_ablate(const kguf_config* cfg, const char* run_dir, const char* preset,
                        size_t* rows) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    need(preset, "preset");
    auto v = kguf::pipeline::ablate(cfg->cfg, run_dir, preset);
    if (rows) *rows = v.size();
  });
}

kguf_status kguf_run_all(const kguf_config* cfg, const char* run_dir, kguf_eval_report* report) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    auto r = kguf::pipeline::run_all(cfg->cfg, run_dir);
    if (report) *report = to_c(r);
  });
}

kguf_status kguf_generate_toy(const char* dir, uint64_t seed) {
  return guarded([&] {
    need(dir, "dir");
    kguf::toy::generate(dir, seed);
  });
}

kguf_status kguf_model_load(const kguf_config* cfg, const char* run_dir, const char* checkpoint,
                            kguf_model** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(run_dir, "run_dir");
    need(out, "out");
    namespace fs = std::filesystem;
    const auto s = cfg->cfg.settings();
    const fs::path ckpt = checkpoint && *checkpoint ? fs::path(checkpoint)
                                                    : fs::path(run_dir) / "train" / "checkpoint";
    auto m = std::make_unique<kguf_model>();
    m->dataset = kguf::data::read_split_files(fs::path(run_dir) / "split");
    const auto params = kguf::model::load_checkpoint_params(ckpt);
    const auto item_features = kguf::tree::read_item_selected(ckpt / "item_selected.tsv", m->dataset);
    const auto knowledge = kguf::graph::ItemKnowledge::from_item_features(item_features);
    if (params.users.rows() != m->dataset.num_users() ||
        params.items.rows() != m->dataset.num_items() ||
        params.features.rows() != knowledge.num_rows())
      kguf::fail(kguf::ErrorCode::kMismatch, "checkpoint shapes do not match the run's data");
    const auto graph = kguf::graph::build_graph(m->dataset);
    m->embeddings = kguf::model::final_embeddings(params, graph, knowledge, s.train.propagation());
    *out = m.release();
  });
}

void kguf_model_free(kguf_model* model) { delete model; }

uint64_t kguf_model_num_users(const kguf_model* model) { return model ? model->dataset.num_users() : 0; }

uint64_t kguf_model_num_items(const kguf_model* model) { return model ? model->dataset.num_items() : 0; }

uint64_t kguf_model_dim(const kguf_model* model) { return model ? model->embeddings.users.cols() : 0; }

const char* kguf_model_item_id(const kguf_model* model, uint64_t index) {
  if (!model || index >= model->dataset.num_items()) return nullptr;
  return model->dataset.items.id(static_cast<kguf::data::Index>(index)).c_str();
}

const char* kguf_model_user_id(const kguf_model* model, uint64_t index) {
  if (!model || index >= model->dataset.num_users()) return nullptr;
  return model->dataset.users.id(static_cast<kguf::data::Index>(index)).c_str();
}

kguf_status kguf_model_score(const kguf_model* model, const char* user_id, const char* item_id,
                             double* score) {
  return guarded([&] {
    need(model, "model");
    need(user_id, "user_id");
    need(item_id, "item_id");
    need(score, "score");
    auto u = model->dataset.users.at(user_id);
    auto i = model->dataset.items.at(item_id);
    *score = kguf::model::predict(model->embeddings.users.row(u), model->embeddings.items.row(i));
  });
}

kguf_status kguf_model_recommend(const kguf_model* model, const char* user_id, size_t k,
                                 uint64_t* items, double* scores, size_t* count) {
  return guarded([&] {
    need(model, "model");
    need(user_id, "user_id");
    need(count, "count");
    if (k > 0) need(items, "items");
    *count = 0;
    if (k == 0) return;
    const auto u = model->dataset.users.at(user_id);
    const auto& emb = model->embeddings;
    std::vector<double> all(model->dataset.num_items());
    for (kguf::data::Index i = 0; i < all.size(); ++i)
      all[i] = kguf::model::predict(emb.users.row(u), emb.items.row(i));
    auto ranked = kguf::eval::rank_topk(all, k, model->dataset.train_lists.items(u));
    for (std::size_t p = 0; p < ranked.items.size(); ++p) {
      items[p] = ranked.items[p];
      if (scores) scores[p] = all[ranked.items[p]];
    }
    *count = ranked.items.size();
  });
}

}  // extern "C"
