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
#include "treefilter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "textio.hpp"

namespace kguf::tree {

void TreeConfig::validate() const {
  require(std::isfinite(eta) && eta > 0.0, "tree eta must be positive");
  require(min_samples_split >= 1, "tree min_samples_split must be >= 1");
}

double entropy(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  if (total == 0) fail(ErrorCode::kInvalidArgument, "entropy of an empty population");
  double h = 0.0;
  for (std::size_t c : class_counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain(std::size_t pos, std::size_t neg, std::size_t pos_with,
                        std::size_t neg_with) {
  const std::size_t n = pos + neg;
  if (n == 0) fail(ErrorCode::kInvalidArgument, "information gain of an empty population");
  const std::size_t with = pos_with + neg_with;
  const std::size_t without = n - with;
  const std::size_t parent[2] = {pos, neg};
  double conditional = 0.0;
  if (with > 0) {
    const std::size_t c[2] = {pos_with, neg_with};
    conditional += static_cast<double>(with) / static_cast<double>(n) * entropy(c);
  }
  if (without > 0) {
    const std::size_t c[2] = {pos - pos_with, neg - neg_with};
    conditional += static_cast<double>(without) / static_cast<double>(n) * entropy(c);
  }
  return entropy(parent) - conditional;
}

double information_gain(std::span<const bool> labels, std::span<const bool> presence) {
  require(labels.size() == presence.size(), "labels and presence differ in length");
  std::size_t pos = 0, neg = 0, pos_with = 0, neg_with = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    (labels[k] ? pos : neg) += 1;
    if (presence[k]) (labels[k] ? pos_with : neg_with) += 1;
  }
  return information_gain(pos, neg, pos_with, neg_with);
}

std::vector<data::Index> sample_tree_negatives(const data::InteractionDataset& dataset,
                                               data::Index user, double eta, Rng& rng,
                                               bool strict) {
  auto positives = dataset.train_lists.items(user);
  if (positives.empty()) fail(ErrorCode::kInvalidArgument, "user has no train positives");
  std::vector<data::Index> pool;
  pool.reserve(dataset.num_items());
  for (data::Index i = 0; i < dataset.num_items(); ++i) {
    if (dataset.train_lists.contains(user, i)) continue;
    if (strict && (dataset.val_lists.contains(user, i) || dataset.test_lists.contains(user, i)))
      continue;
    pool.push_back(i);
  }
  // eta * |positives| rounded half up; at least one negative.
  auto wanted = static_cast<std::size_t>(std::floor(eta * positives.size() + 0.5));
  wanted = std::max<std::size_t>(wanted, 1);
  auto sample = rng.sample_without_replacement(std::move(pool), wanted);
  std::sort(sample.begin(), sample.end());
  return sample;
}

std::vector<kg::FeatureIndex> UserDecisionTree::selected_features() const {
  std::set<kg::FeatureIndex> out;
  for (const auto& n : nodes)
    if (!n.is_leaf()) out.insert(n.feature);
  return {out.begin(), out.end()};
}

std::size_t UserDecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes)
    if (!n.is_leaf()) d = std::max(d, n.depth + 1);
  return d;
}

bool UserDecisionTree::is_positive(data::Index item) const {
  return std::binary_search(positives.begin(), positives.end(), item);
}

namespace {

struct Candidate {
  std::size_t pos_with = 0;
  std::size_t neg_with = 0;
};

}  // namespace

UserDecisionTree induce_tree(data::Index user, std::vector<data::Index> positives,
                             std::vector<data::Index> negatives,
                             const kg::ItemFeatureIndex& features, const TreeConfig& config) {
  std::sort(positives.begin(), positives.end());
  std::sort(negatives.begin(), negatives.end());
  UserDecisionTree tree;
  tree.user = user;
  tree.positives = std::move(positives);
  tree.negatives = std::move(negatives);

  TreeNode root;
  std::merge(tree.positives.begin(), tree.positives.end(), tree.negatives.begin(),
             tree.negatives.end(), std::back_inserter(root.items));
  tree.nodes.push_back(std::move(root));

  // Features used on the path to each node.
  std::vector<std::vector<kg::FeatureIndex>> path_features(1);

  for (std::size_t cur = 0; cur < tree.nodes.size(); ++cur) {
    // Copy what we need: push_back below may reallocate `nodes`.
    std::vector<data::Index> items = tree.nodes[cur].items;
    const std::size_t depth = tree.nodes[cur].depth;
    std::size_t pos = 0;
    for (data::Index i : items) pos += tree.is_positive(i) ? 1 : 0;
    const std::size_t neg = items.size() - pos;
    tree.nodes[cur].positives = pos;
    tree.nodes[cur].negatives = neg;
    tree.nodes[cur].label_positive = pos >= neg;

    if (pos == 0 || neg == 0) continue;
    if (config.max_depth != 0 && depth >= config.max_depth) continue;
    if (items.size() < config.min_samples_split) continue;

    std::map<kg::FeatureIndex, Candidate> candidates;
    for (data::Index i : items) {
      const bool positive = tree.is_positive(i);
      for (kg::FeatureIndex f : features.features_of[i]) {
        auto& c = candidates[f];
        (positive ? c.pos_with : c.neg_with) += 1;
      }
    }
    const auto& used = path_features[cur];

    std::optional<kg::FeatureIndex> best;
    double best_gain = 0.0;
    for (const auto& [f, c] : candidates) {
      if (std::find(used.begin(), used.end(), f) != used.end()) continue;
      double g = information_gain(pos, neg, c.pos_with, c.neg_with);
      // Ascending feature order: only a strictly better gain displaces the incumbent.
      if (!best || g > best_gain + kGainTolerance) {
        best = f;
        best_gain = g;
      }
    }
    if (!best || best_gain <= kGainTolerance) continue;

    TreeNode has, lacks;
    has.depth = lacks.depth = depth + 1;
    for (data::Index i : items) {
      const auto& fs = features.features_of[i];
      (std::binary_search(fs.begin(), fs.end(), *best) ? has : lacks).items.push_back(i);
    }
    auto child_path = used;
    child_path.push_back(*best);

    tree.nodes[cur].feature = *best;
    tree.nodes[cur].gain = best_gain;
    tree.nodes[cur].has_child = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(has));
    path_features.push_back(child_path);
    tree.nodes[cur].lacks_child = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(lacks));
    path_features.push_back(std::move(child_path));
  }
  return tree;
}

UserDecisionTree build_user_tree(const data::InteractionDataset& dataset, data::Index user,
                                 const kg::ItemFeatureIndex& features, const TreeConfig& config,
                                 Rng& rng) {
  auto pos = dataset.train_lists.items(user);
  auto negatives = sample_tree_negatives(dataset, user, config.eta, rng, config.strict_negatives);
  return induce_tree(user, {pos.begin(), pos.end()}, std::move(negatives), features, config);
}

std::vector<UserDecisionTree> build_all_trees(const data::InteractionDataset& dataset,
                                              const kg::ItemFeatureIndex& features,
                                              const TreeConfig& config) {
  config.validate();
  const std::size_t nu = dataset.num_users();
  std::vector<std::optional<UserDecisionTree>> slots(nu);
  parallel_for(
      nu,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
          auto user = static_cast<data::Index>(u);
          auto pos = dataset.train_lists.items(user);
          if (pos.empty()) {
            log::warn("trees: user '" + dataset.users.id(user) + "' has no train positives");
            continue;
          }
          if (pos.size() == dataset.num_items()) {
            log::warn("trees: user '" + dataset.users.id(user) + "' has no negative candidates");
            continue;
          }
          Rng rng(mix_seed(config.seed, u));
          slots[u] = build_user_tree(dataset, user, features, config, rng);
        }
      },
      16);
  std::vector<UserDecisionTree> trees;
  trees.reserve(nu);
  for (auto& t : slots)
    if (t) trees.push_back(std::move(*t));
  return trees;
}

SelectedFeatureSet compute_selected_features(std::span<const UserDecisionTree> trees,
                                             const kg::ItemFeatureIndex& features,
                                             std::size_t num_users) {
  SelectedFeatureSet out;
  out.per_user.resize(num_users);
  std::vector<bool> in_union(features.num_features(), false);
  for (const auto& t : trees) {
    auto sel = t.selected_features();
    for (kg::FeatureIndex f : sel) in_union[f] = true;
    out.per_user.at(t.user) = std::move(sel);
  }
  for (kg::FeatureIndex f = 0; f < in_union.size(); ++f)
    if (in_union[f]) out.selected.push_back(f);

  out.item_features.resize(features.num_items());
  std::size_t empty = 0, total = 0;
  for (std::size_t i = 0; i < features.num_items(); ++i) {
    for (kg::FeatureIndex f : features.features_of[i])
      if (in_union[f]) out.item_features[i].push_back(f);
    empty += out.item_features[i].empty() ? 1 : 0;
    total += out.item_features[i].size();
  }
  if (features.num_items() > 0) {
    out.empty_item_fraction = static_cast<double>(empty) / features.num_items();
    out.mean_item_features = static_cast<double>(total) / features.num_items();
  }
  return out;
}

void write_selected_features(const std::filesystem::path& dir,
                             const data::InteractionDataset& dataset,
                             const SelectedFeatureSet& selected) {
  std::ostringstream users;
  for (std::size_t u = 0; u < selected.per_user.size(); ++u) {
    users << dataset.users.id(static_cast<data::Index>(u));
    for (auto f : selected.per_user[u]) users << '\t' << f;
    users << '\n';
  }
  text::write_file(dir / "user_trees.tsv", users.str());

  std::ostringstream items;
  for (std::size_t i = 0; i < selected.item_features.size(); ++i) {
    items << dataset.items.id(static_cast<data::Index>(i));
    for (auto f : selected.item_features[i]) items << '\t' << f;
    items << '\n';
  }
  text::write_file(dir / "item_selected.tsv", items.str());
}

std::vector<std::vector<kg::FeatureIndex>> read_item_selected(
    const std::filesystem::path& path, const data::InteractionDataset& dataset) {
  std::vector<std::vector<kg::FeatureIndex>> out(dataset.num_items());
  std::vector<bool> seen(dataset.num_items(), false);
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty()) return;
    auto cols = text::split(line);
    auto where = path.string() + ":" + std::to_string(n) + ": ";
    auto item = dataset.items.find(std::string(cols[0]));
    if (!item) fail(ErrorCode::kMismatch, where + "unknown item '" + std::string(cols[0]) + "'");
    for (std::size_t c = 1; c < cols.size(); ++c) {
      auto f = text::parse_uint(cols[c]);
      if (!f) fail(ErrorCode::kParse, where + "bad feature index");
      out[*item].push_back(static_cast<kg::FeatureIndex>(*f));
    }
    std::sort(out[*item].begin(), out[*item].end());
    seen[*item] = true;
  });
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    fail(ErrorCode::kMismatch, path.string() + " does not cover every dataset item");
  return out;
}

}  // namespace kguf::tree
