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
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

// Subcommand implementations. Every stage reads and writes inside one run
// directory:
//
//   split/       train.tsv val.tsv test.tsv manifest.json
//   trees/       features.tsv user_trees.tsv item_selected.tsv coverage.json
//   train/       checkpoint/ train_log.tsv train_timing.tsv embeddings/
//   report.json
//   sweep/       leaderboard.tsv trial-NNN/ trees-*/ best_config.json
//   ablation/    <preset>.tsv and one sub-directory per setting
namespace kguf::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "1.0.0";

// <output_dir>/<config hash>-<UTC timestamp>, made unique if it already exists.
fs::path default_run_dir(const config::RunConfig& cfg);

struct PreprocessStats {
  std::size_t raw = 0;
  std::size_t binarized = 0;
  std::size_t deduplicated = 0;
  std::size_t cored = 0;
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  std::size_t repaired = 0;
};

PreprocessStats preprocess(const config::RunConfig& cfg, const fs::path& run_dir);

struct TreeStats {
  fs::path dir;
  std::size_t users_with_tree = 0;
  std::size_t num_features = 0;
  std::size_t selected_features = 0;
  double empty_item_fraction = 0.0;
  double mean_item_features = 0.0;
  double mean_tree_depth = 0.0;
};

// Uses cfg's tree settings; out_dir defaults to run_dir/trees.
TreeStats build_trees(const config::RunConfig& cfg, const fs::path& run_dir,
                      const fs::path& out_dir = {});

// "eta": one output per eta in {1,2,5,10,20}; "depth": one per depth in
// {1,2,5,10,15,20,unlimited}; "seeds": one per entry of tree.seeds.
std::vector<TreeStats> build_tree_preset(const config::RunConfig& cfg, const fs::path& run_dir,
                                         const std::string& preset);

struct TrainStats {
  fs::path dir;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double initial_val_ndcg = 0.0;
  double best_val_ndcg = 0.0;
  bool resumed = false;
};

struct TrainOptions {
  fs::path trees_dir;  // default run_dir/trees
  fs::path out_dir;    // default run_dir/train
  bool resume = false;
};

TrainStats train(const config::RunConfig& cfg, const fs::path& run_dir,
                 const TrainOptions& options = {});

struct Metrics {
  double ndcg = 0.0;
  double hr = 0.0;
  double recall = 0.0;
  std::size_t users = 0;
};

struct EvalReport {
  std::size_t k = 0;
  Metrics val;
  Metrics test;
  fs::path path;
};

// checkpoint defaults to run_dir/train/checkpoint, report_path to
// run_dir/report.json.
EvalReport evaluate(const config::RunConfig& cfg, const fs::path& run_dir,
                    const fs::path& checkpoint = {}, const fs::path& report_path = {});

struct SweepTrial {
  std::size_t trial = 0;
  double val_ndcg = 0.0;
  std::size_t best_epoch = 0;
  double learning_rate = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  std::size_t layers = 0;
  double eta = 0.0;
  std::size_t max_depth = 0;
};

struct SweepResult {
  std::size_t trials_total = 0;
  std::size_t trials_run = 0;  // in this invocation; the rest were resumed
  SweepTrial best;
  EvalReport best_report;
  std::vector<SweepTrial> leaderboard;  // in trial order
};

// trials = 0 uses sweep.trials from the config.
SweepResult sweep(const config::RunConfig& cfg, const fs::path& run_dir, std::size_t trials = 0);

// The hyper-parameter combinations a sweep visits, in trial order.
std::vector<SweepTrial> sweep_plan(const config::SweepSpace& space, std::size_t trials);

struct AblationRow {
  std::string label;
  std::size_t runs = 0;
  double val_ndcg_mean = 0.0;
  double val_ndcg_min = 0.0;
  double val_ndcg_max = 0.0;
  double test_ndcg = 0.0;
  double test_hr = 0.0;
  double test_recall = 0.0;
};

// Presets: "alpha" (0.2..0.8), "switches" (full, knowledge off = alpha 0,
// collaborative off = alpha 1), "eta", "depth" (repeated over tree.seeds).
// Rows are also written to run_dir/ablation/<preset>.tsv.
std::vector<AblationRow> ablate(const config::RunConfig& cfg, const fs::path& run_dir,
                                const std::string& preset);

// preprocess, build_trees, train, evaluate.
EvalReport run_all(const config::RunConfig& cfg, const fs::path& run_dir);

}  // namespace kguf::pipeline
