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
#include <limits>
#include <span>
#include <vector>

#include "data.hpp"
#include "kg.hpp"
#include "rng.hpp"

namespace kguf::tree {

// Gains closer than this are ties; a split needs a gain above it.
inline constexpr double kGainTolerance = 1e-12;

struct TreeConfig {
  // Sampled negatives per positive.
  double eta = 1.0;
  // 0 means unlimited.
  std::size_t max_depth = 0;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 42;
  // Also keep validation and test positives out of the negative pool.
  bool strict_negatives = false;

  void validate() const;
};

double entropy(std::span<const std::size_t> class_counts);

// Gain of a binary presence split on a node with `pos`/`neg` labelled items,
// of which `pos_with`/`neg_with` carry the feature.
double information_gain(std::size_t pos, std::size_t neg, std::size_t pos_with,
                        std::size_t neg_with);

// labels[k] true = positive; presence[k] true = item k has the feature.
double information_gain(std::span<const bool> labels, std::span<const bool> presence);

// Uniform sample without replacement from the items the user has not
// interacted with in train (or in any split when strict). The result is sorted.
std::vector<data::Index> sample_tree_negatives(const data::InteractionDataset& dataset,
                                               data::Index user, double eta, Rng& rng,
                                               bool strict = false);

struct TreeNode {
  static constexpr std::uint32_t kNoFeature = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t feature = kNoFeature;
  double gain = 0.0;
  std::size_t depth = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool label_positive = true;
  int has_child = -1;
  int lacks_child = -1;
  // Sample items reaching this node, sorted.
  std::vector<data::Index> items;

  bool is_leaf() const { return feature == kNoFeature; }
};

struct UserDecisionTree {
  data::Index user = 0;
  std::vector<data::Index> positives;  // sorted
  std::vector<data::Index> negatives;  // sorted
  std::vector<TreeNode> nodes;         // nodes[0] is the root

  // Features on internal nodes, sorted and unique.
  std::vector<kg::FeatureIndex> selected_features() const;
  // Number of internal levels on the longest root-to-leaf path.
  std::size_t depth() const;
  bool is_positive(data::Index item) const;
};

// Greedy top-down induction on a given labelled sample. Chooses the highest
// gain feature at each node (lowest index on ties) and stops on purity, no
// positive gain, the depth cap or the minimum split size.
UserDecisionTree induce_tree(data::Index user, std::vector<data::Index> positives,
                             std::vector<data::Index> negatives,
                             const kg::ItemFeatureIndex& features, const TreeConfig& config);

// Samples negatives for the user and runs induce_tree. The user must have at
// least one train positive.
UserDecisionTree build_user_tree(const data::InteractionDataset& dataset, data::Index user,
                                 const kg::ItemFeatureIndex& features, const TreeConfig& config,
                                 Rng& rng);

// One tree per eligible user, in user order. Each user draws from its own
// stream derived from (config.seed, user), so results do not depend on the
// number of users or on scheduling.
std::vector<UserDecisionTree> build_all_trees(const data::InteractionDataset& dataset,
                                              const kg::ItemFeatureIndex& features,
                                              const TreeConfig& config);

struct SelectedFeatureSet {
  // Per user index; empty for users without a tree.
  std::vector<std::vector<kg::FeatureIndex>> per_user;
  // Union over all users, sorted.
  std::vector<kg::FeatureIndex> selected;
  // F*_i per item index, sorted.
  std::vector<std::vector<kg::FeatureIndex>> item_features;

  double empty_item_fraction = 0.0;
  double mean_item_features = 0.0;
};

SelectedFeatureSet compute_selected_features(std::span<const UserDecisionTree> trees,
                                             const kg::ItemFeatureIndex& features,
                                             std::size_t num_users);

// user_trees.tsv: "user_id\tf...", item_selected.tsv: "item_id\tf...".
void write_selected_features(const std::filesystem::path& dir,
                             const data::InteractionDataset& dataset,
                             const SelectedFeatureSet& selected);

std::vector<std::vector<kg::FeatureIndex>> read_item_selected(
    const std::filesystem::path& path, const data::InteractionDataset& dataset);

}  // namespace kguf::tree
