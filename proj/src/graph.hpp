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
#include <span>
#include <vector>

#include "data.hpp"
#include "kg.hpp"
#include "matrix.hpp"

namespace kguf::graph {

// Symmetrically normalized user-item adjacency built from train pairs. Both
// directions are stored in compressed row form with neighbours sorted by index,
// which fixes the summation order.
struct PropagationGraph {
  std::size_t num_users = 0;
  std::size_t num_items = 0;

  std::vector<std::size_t> user_offsets;
  std::vector<data::Index> user_neighbors;  // items of each user
  std::vector<double> user_coeffs;

  std::vector<std::size_t> item_offsets;
  std::vector<data::Index> item_neighbors;  // users of each item
  std::vector<double> item_coeffs;

  std::size_t user_degree(data::Index u) const { return user_offsets[u + 1] - user_offsets[u]; }
  std::size_t item_degree(data::Index i) const { return item_offsets[i + 1] - item_offsets[i]; }
  std::size_t num_edges() const { return user_neighbors.size(); }

  // 1/sqrt(deg(u) deg(i)) for an existing edge, 0 otherwise.
  double coefficient(data::Index u, data::Index i) const;
};

PropagationGraph build_graph(const data::InteractionDataset& dataset);

// Items' filtered features mapped onto rows of the feature embedding matrix.
// Rows follow ascending global feature index.
struct ItemKnowledge {
  std::size_t num_items = 0;
  std::vector<kg::FeatureIndex> feature_of_row;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> rows;

  static ItemKnowledge from_item_features(
      const std::vector<std::vector<kg::FeatureIndex>>& item_features);

  std::size_t num_rows() const { return feature_of_row.size(); }
  std::span<const std::uint32_t> rows_of(data::Index item) const {
    return {rows.data() + offsets[item], offsets[item + 1] - offsets[item]};
  }
};

enum class EmptyFeaturePolicy {
  // Featureless items drop the knowledge term and keep full neighbour weight.
  kCollaborativeOnly,
  // Featureless items keep the (1 - alpha) neighbour weight.
  kKeepWeight,
};

struct PropagationConfig {
  double alpha = 0.4;
  std::size_t layers = 3;
  EmptyFeaturePolicy empty_policy = EmptyFeaturePolicy::kCollaborativeOnly;

  void validate() const;
};

struct LayerStack {
  std::vector<Matrix> users;  // layers 0..L
  std::vector<Matrix> items;  // layers 0..L
  // Alpha-weighted feature mean per item; identical for every layer >= 1.
  Matrix knowledge;
};

struct Embeddings {
  Matrix users;
  Matrix items;
};

// Per-item weights of the two terms of the item update.
struct ItemMixing {
  std::vector<double> knowledge;      // alpha / |F*_i|, or 0
  std::vector<double> collaborative;  // 1 - alpha, or 1
};

ItemMixing item_mixing(const ItemKnowledge& knowledge, const PropagationConfig& config);

LayerStack propagate(const Matrix& user_params, const Matrix& item_params,
                     const Matrix& feature_params, const PropagationGraph& graph,
                     const ItemKnowledge& knowledge, const PropagationConfig& config);

// sum_l 1/(1+l) * layer l (a weighted sum, not a mean).
Embeddings combine_layers(const LayerStack& stack);

// Reverse-mode pass of propagate + combine_layers: maps gradients of the
// combined embeddings onto the layer-0 parameters and the feature embeddings.
struct ParamGradients {
  Matrix users;
  Matrix items;
  Matrix features;
};

ParamGradients backpropagate(const Matrix& grad_users, const Matrix& grad_items,
                             std::size_t feature_rows, const PropagationGraph& graph,
                             const ItemKnowledge& knowledge, const PropagationConfig& config);

}  // namespace kguf::graph
