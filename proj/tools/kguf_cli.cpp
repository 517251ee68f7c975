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
// kguf command line. Talks to the library only through the C API.
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kguf.h"

namespace {

// Exit codes: 0 ok, 1-7 the kguf_status of the failing call, CLI11's own
// codes (100+) for usage errors.
struct Failure {
  kguf_status status;
};

void check(kguf_status s) {
  if (s != KGUF_OK) {
    std::cerr << "kguf: " << kguf_last_error() << "\n";
    throw Failure{s};
  }
}

std::string fetch(const std::function<kguf_status(char*, size_t, size_t*)>& call) {
  size_t needed = 0;
  call(nullptr, 0, &needed);
  std::string buf(needed, '\0');
  check(call(buf.data(), buf.size(), &needed));
  buf.resize(needed ? needed - 1 : 0);
  return buf;
}

using ConfigPtr = std::unique_ptr<kguf_config, decltype(&kguf_config_free)>;

struct ConfigOptions {
  std::string file;
  std::string preset;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "JSON config file");
    cmd->add_option("--preset", preset, "start from a bundled preset instead of a file");
    cmd->add_option("--set", sets, "override a config key, e.g. --set model.alpha=0");
  }

  ConfigPtr build(const std::vector<std::pair<std::string, std::string>>& extra = {}) const {
    kguf_config* raw = nullptr;
    if (!file.empty()) {
      check(kguf_config_load(file.c_str(), &raw));
    } else {
      check(kguf_config_new(preset.empty() ? nullptr : preset.c_str(), &raw));
    }
    ConfigPtr cfg(raw, &kguf_config_free);
    if (!file.empty() && !preset.empty())
      std::cerr << "kguf: --preset ignored because --config was given\n";
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "kguf: --set expects key=value, got '" << kv << "'\n";
        throw Failure{KGUF_ERR_INVALID_ARGUMENT};
      }
      check(kguf_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    for (const auto& [k, v] : extra) check(kguf_config_set(cfg.get(), k.c_str(), v.c_str()));
    return cfg;
  }
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

void print_metrics(const char* split, const kguf_metrics& m, uint64_t k) {
  std::printf("%s_ndcg@%llu\t%.6f\n%s_hr@%llu\t%.6f\n%s_recall@%llu\t%.6f\n%s_users\t%llu\n", split,
              static_cast<unsigned long long>(k), m.ndcg, split, static_cast<unsigned long long>(k),
              m.hr, split, static_cast<unsigned long long>(k), m.recall, split,
              static_cast<unsigned long long>(m.users));
}

std::string resolve_run_dir(const std::string& given, const kguf_config* cfg) {
  if (!given.empty()) return given;
  auto dir = fetch([&](char* b, size_t c, size_t* n) { return kguf_default_run_dir(cfg, b, c, n); });
  std::printf("run_dir\t%s\n", dir.c_str());
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kguf: knowledge-graph user-feature recommender toolkit"};
  app.require_subcommand(1);
  int verbosity = 1;
  bool quiet = false;
  unsigned threads = 0;
  app.add_flag("-v,--verbose", [&](std::int64_t n) { verbosity = 1 + static_cast<int>(n); },
               "more progress output (repeatable)");
  app.add_flag("-q,--quiet", quiet, "errors only");
  app.add_option("--threads", threads, "worker thread cap (same as KGUF_NUM_THREADS)");
  app.set_version_flag("--version", std::string(kguf_version()));

  ConfigOptions co;
  std::string run_dir;
  std::function<void()> action;

  auto stage = [&](const char* name, const char* help, bool run_dir_required) {
    auto* cmd = app.add_subcommand(name, help);
    co.attach(cmd);
    auto* o = cmd->add_option("-r,--run-dir", run_dir, "run directory");
    if (run_dir_required) o->required();
    return cmd;
  };

  auto* pre = stage("preprocess", "binarize, k-core filter and split the interactions", false);
  pre->callback([&] {
    action = [&] {
      auto cfg = co.build();
      auto dir = resolve_run_dir(run_dir, cfg.get());
      kguf_preprocess_stats s{};
      check(kguf_preprocess(cfg.get(), dir.c_str(), &s));
      std::printf("raw\t%llu\nbinarized\t%llu\ndeduplicated\t%llu\nk_core\t%llu\nusers\t%llu\n"
                  "items\t%llu\ntrain\t%llu\nval\t%llu\ntest\t%llu\nrepaired_to_train\t%llu\n",
                  (unsigned long long)s.raw, (unsigned long long)s.binarized,
                  (unsigned long long)s.deduplicated, (unsigned long long)s.cored,
                  (unsigned long long)s.users, (unsigned long long)s.items,
                  (unsigned long long)s.train, (unsigned long long)s.val,
                  (unsigned long long)s.test, (unsigned long long)s.repaired);
    };
  });

  std::string trees_out, tree_preset;
  auto* bt = stage("build-trees", "extract KG features and build per-user decision trees", true);
  bt->add_option("-o,--out", trees_out, "output directory (default <run>/trees)");
  bt->add_option("--sweep", tree_preset, "eta | depth | seeds: one output per setting")
      ->check(CLI::IsMember({"eta", "depth", "seeds"}));
  bt->callback([&] {
    action = [&] {
      auto cfg = co.build();
      if (!tree_preset.empty()) {
        size_t n = 0;
        check(kguf_build_trees_preset(cfg.get(), run_dir.c_str(), tree_preset.c_str(), &n));
        std::printf("outputs\t%zu\n", n);
        return;
      }
      kguf_tree_stats s{};
      check(kguf_build_trees(cfg.get(), run_dir.c_str(), opt(trees_out), &s));
      std::printf("users_with_tree\t%llu\nfeatures\t%llu\nselected_features\t%llu\n"
                  "empty_item_fraction\t%.6f\nmean_item_features\t%.6f\nmean_tree_depth\t%.6f\n",
                  (unsigned long long)s.users_with_tree, (unsigned long long)s.num_features,
                  (unsigned long long)s.selected_features, s.empty_item_fraction,
                  s.mean_item_features, s.mean_tree_depth);
    };
  });

  std::string trees_dir, train_out;
  bool resume = false, no_knowledge = false, no_collab = false;
  auto* tr = stage("train", "train the model with early stopping on validation nDCG", true);
  tr->add_option("--trees", trees_dir, "tree output to use (default <run>/trees)");
  tr->add_option("-o,--out", train_out, "output directory (default <run>/train)");
  tr->add_flag("--resume", resume, "continue from the checkpoint in the output directory");
  auto* nk = tr->add_flag("--no-knowledge", no_knowledge, "alpha = 0");
  tr->add_flag("--no-collaborative", no_collab, "alpha = 1")->excludes(nk);
  tr->callback([&] {
    action = [&] {
      std::vector<std::pair<std::string, std::string>> extra;
      if (no_knowledge) extra.emplace_back("model.alpha", "0");
      if (no_collab) extra.emplace_back("model.alpha", "1");
      auto cfg = co.build(extra);
      kguf_train_stats s{};
      check(kguf_train(cfg.get(), run_dir.c_str(), opt(trees_dir), opt(train_out), resume, &s));
      std::printf("epochs\t%llu\nbest_epoch\t%llu\ninitial_val_ndcg\t%.6f\nbest_val_ndcg\t%.6f\n"
                  "resumed\t%d\n",
                  (unsigned long long)s.epochs, (unsigned long long)s.best_epoch,
                  s.initial_val_ndcg, s.best_val_ndcg, s.resumed);
    };
  });

  std::string checkpoint, report;
  auto* ev = stage("evaluate", "rank all unrated items and report nDCG/HR/Recall", true);
  ev->add_option("--checkpoint", checkpoint, "checkpoint directory (default <run>/train/checkpoint)");
  ev->add_option("--report", report, "report path (default <run>/report.json)");
  ev->callback([&] {
    action = [&] {
      auto cfg = co.build();
      kguf_eval_report r{};
      check(kguf_evaluate(cfg.get(), run_dir.c_str(), opt(checkpoint), opt(report), &r));
      print_metrics("val", r.val, r.k);
      print_metrics("test", r.test, r.k);
    };
  });

  std::uint64_t trials = 0;
  auto* sw = stage("sweep", "hyper-parameter search selected on validation nDCG", true);
  sw->add_option("-n,--trials", trials, "number of trials (default sweep.trials)");
  sw->callback([&] {
    action = [&] {
      auto cfg = co.build();
      kguf_sweep_result r{};
      check(kguf_sweep(cfg.get(), run_dir.c_str(), trials, &r));
      std::printf("trials\t%llu\ntrials_run\t%llu\nbest_trial\t%llu\nbest_val_ndcg\t%.6f\n",
                  (unsigned long long)r.trials_total, (unsigned long long)r.trials_run,
                  (unsigned long long)r.best_trial, r.best_val_ndcg);
      print_metrics("test", r.best_test, 10);
    };
  });

  std::string ablation;
  auto* ab = stage("ablate", "train and evaluate a family of settings", true);
  ab->add_option("family", ablation, "alpha | switches | eta | depth")
      ->required()
      ->check(CLI::IsMember({"alpha", "switches", "eta", "depth"}));
  ab->callback([&] {
    action = [&] {
      auto cfg = co.build();
      size_t rows = 0;
      check(kguf_ablate(cfg.get(), run_dir.c_str(), ablation.c_str(), &rows));
      std::printf("rows\t%zu\ntable\t%s/ablation/%s.tsv\n", rows, run_dir.c_str(), ablation.c_str());
    };
  });

  auto* run = stage("run", "preprocess, build-trees, train and evaluate", false);
  run->callback([&] {
    action = [&] {
      auto cfg = co.build();
      auto dir = resolve_run_dir(run_dir, cfg.get());
      kguf_eval_report r{};
      check(kguf_run_all(cfg.get(), dir.c_str(), &r));
      print_metrics("val", r.val, r.k);
      print_metrics("test", r.test, r.k);
    };
  });

  std::string user;
  std::size_t topk = 10;
  auto* rec = stage("recommend", "top-k unseen items for a user", true);
  rec->add_option("--checkpoint", checkpoint, "checkpoint directory");
  rec->add_option("-u,--user", user, "user id")->required();
  rec->add_option("-k", topk, "list length");
  rec->callback([&] {
    action = [&] {
      auto cfg = co.build();
      kguf_model* raw = nullptr;
      check(kguf_model_load(cfg.get(), run_dir.c_str(), opt(checkpoint), &raw));
      std::unique_ptr<kguf_model, decltype(&kguf_model_free)> model(raw, &kguf_model_free);
      std::vector<uint64_t> items(topk);
      std::vector<double> scores(topk);
      size_t n = 0;
      check(kguf_model_recommend(model.get(), user.c_str(), topk, items.data(), scores.data(), &n));
      for (size_t p = 0; p < n; ++p)
        std::printf("%zu\t%s\t%.6f\n", p + 1, kguf_model_item_id(model.get(), items[p]), scores[p]);
    };
  });

  std::string toy_out;
  std::uint64_t toy_seed = 2024;
  auto* toy = app.add_subcommand("toy", "write the synthetic toy dataset");
  toy->add_option("-o,--out", toy_out, "output directory")->required();
  toy->add_option("--seed", toy_seed, "generator seed");
  toy->callback([&] { action = [&] { check(kguf_generate_toy(toy_out.c_str(), toy_seed)); }; });

  bool show_hash = false, list_presets = false;
  std::string get_key, save_path;
  auto* cf = app.add_subcommand("config", "print the effective config");
  co.attach(cf);
  cf->add_flag("--hash", show_hash, "print only the config hash");
  cf->add_flag("--presets", list_presets, "list bundled presets");
  cf->add_option("--get", get_key, "print one key");
  cf->add_option("--save", save_path, "write the effective config to a file");
  cf->callback([&] {
    action = [&] {
      if (list_presets) {
        std::fputs(fetch(kguf_preset_names).c_str(), stdout);
        return;
      }
      auto cfg = co.build();
      if (!save_path.empty()) check(kguf_config_save(cfg.get(), save_path.c_str()));
      if (show_hash) {
        char h[17];
        check(kguf_config_hash(cfg.get(), h));
        std::printf("%s\n", h);
      } else if (!get_key.empty()) {
        std::printf("%s\n", fetch([&](char* b, size_t c, size_t* n) {
                              return kguf_config_get(cfg.get(), get_key.c_str(), b, c, n);
                            }).c_str());
      } else if (save_path.empty()) {
        std::fputs(fetch([&](char* b, size_t c, size_t* n) {
                     return kguf_config_dump(cfg.get(), b, c, n);
                   }).c_str(),
                   stdout);
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  kguf_set_verbosity(quiet ? 0 : verbosity);
  if (threads > 0) setenv("KGUF_NUM_THREADS", std::to_string(threads).c_str(), 1);
  try {
    if (action) action();
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  }
  return 0;
}
