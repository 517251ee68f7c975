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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace kguf::model {

enum class OptimizerKind { kAdam, kSgd };

// kFull regularizes every parameter row on every step; kBatch only the user,
// item and feature rows touched by the batch.
enum class RegMode { kFull, kBatch };

struct ModelParams {
  Matrix users;
  Matrix items;
  Matrix features;

  std::size_t dim() const { return users.cols(); }
  bool operator==(const ModelParams&) const = default;
};

struct TrainConfig {
  double alpha = 0.4;
  std::size_t layers = 3;
  double lambda = 1e-4;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  std::size_t eval_k = 10;
  bool strict_eval = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  RegMode reg_mode = RegMode::kFull;
  graph::EmptyFeaturePolicy empty_policy = graph::EmptyFeaturePolicy::kCollaborativeOnly;

  void validate() const;
  graph::PropagationConfig propagation() const {
    return {alpha, layers, empty_policy};
  }
};

struct TrainTriplet {
  data::Index user = 0;
  data::Index positive = 0;
  data::Index negative = 0;
};

// Glorot-uniform draws, U(-b, b) with b = sqrt(6 / (rows + d)); one stream
// per matrix.
ModelParams init_params(std::size_t num_users, std::size_t num_items, std::size_t num_features,
                        std::size_t dim, std::uint64_t seed);

inline double predict(std::span<const double> user, std::span<const double> item) {
  return dot(user, item);
}

// (u, i+) uniform over train pairs, i- uniform over the user's non-train
// items by rejection. Users whose train set is the whole catalog are resampled.
std::vector<TrainTriplet> sample_bpr_batch(const data::InteractionDataset& dataset,
                                           std::size_t batch_size, Rng& rng);

// -ln sigmoid(x), computed as softplus(-x) without overflow.
double neg_log_sigmoid(double x);

struct LossAndGradients {
  double loss = 0.0;  // bpr + reg
  double bpr = 0.0;
  double reg = 0.0;
  ModelParams gradients;
};

// Sum over the batch of -ln sigmoid(r(u,i+) - r(u,i-)) with scores from the
// full propagate -> combine -> dot product pipeline, plus lambda * ||Theta||^2.
LossAndGradients loss_and_gradients(const ModelParams& params,
                                    const graph::PropagationGraph& graph,
                                    const graph::ItemKnowledge& knowledge,
                                    std::span<const TrainTriplet> batch, const TrainConfig& config);

// Final (layer-combined) user and item embeddings.
graph::Embeddings final_embeddings(const ModelParams& params, const graph::PropagationGraph& graph,
                                   const graph::ItemKnowledge& knowledge,
                                   const graph::PropagationConfig& config);

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, const ModelParams& shape_like);

  void step(ModelParams& params, const ModelParams& gradients);

  OptimizerKind kind() const { return kind_; }
  std::uint64_t steps() const { return steps_; }

  // Adam moments (zero-sized for SGD); exposed for checkpointing.
  ModelParams first_moment;
  ModelParams second_moment;
  void set_steps(std::uint64_t s) { steps_ = s; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  double learning_rate_ = 1e-3;
  std::uint64_t steps_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_ndcg = 0.0;
  double seconds = 0.0;  // wall time; not part of any deterministic output
};

// Everything needed to continue training bit-exactly.
struct TrainState {
  ModelParams params;
  ModelParams best;
  Optimizer optimizer;
  Rng rng;
  std::size_t epoch = 0;  // completed epochs
  std::size_t best_epoch = 0;
  double best_score = 0.0;
  double initial_score = 0.0;
  std::size_t bad_epochs = 0;
  bool finished = false;
  std::vector<EpochRecord> log;
};

struct TrainingContext {
  const data::InteractionDataset& dataset;
  const graph::PropagationGraph& graph;
  const graph::ItemKnowledge& knowledge;
  TrainConfig config;
};

double validation_ndcg(const ModelParams& params, const TrainingContext& ctx);

// Fresh parameters and optimizer; the initial snapshot counts as the best so far.
TrainState start_training(const TrainingContext& ctx, std::size_t dim);

// Runs epochs until early stopping or max_epochs. on_epoch is called after
// each completed epoch (e.g. to checkpoint).
void continue_training(TrainState& state, const TrainingContext& ctx,
                       const std::function<void(const TrainState&)>& on_epoch = {});

struct FitResult {
  ModelParams best;
  std::vector<EpochRecord> log;
  double best_score = 0.0;
  double initial_score = 0.0;
  std::size_t best_epoch = 0;
};

FitResult fit(const TrainingContext& ctx, std::size_t dim);

// TSV with header "id\td0..d{n-1}" and one "id\tvalues..." row per matrix row,
// values in shortest round-trip form.
void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                  const Matrix& m);
// Returns ids and values; `cols` is taken from the header.
std::pair<std::vector<std::string>, Matrix> read_matrix(const std::filesystem::path& path);

struct EmbeddingIds {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<std::string> features;
};

// users.tsv / items.tsv hold the layer-combined embeddings, features.tsv the
// raw feature parameters.
void export_embeddings(const std::filesystem::path& dir, const ModelParams& params,
                       const graph::Embeddings& combined, const EmbeddingIds& ids);

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const EmbeddingIds& ids);
TrainState load_checkpoint(const std::filesystem::path& dir, const TrainConfig& config);
// Best-snapshot parameters only.
ModelParams load_checkpoint_params(const std::filesystem::path& dir);

// Deterministic part of the log: "epoch\tloss\tval_ndcg".
std::string format_training_log(const std::vector<EpochRecord>& log);

}  // namespace kguf::model
