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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kguf::data {

using Index = std::uint32_t;

struct RawInteraction {
  std::string user_id;
  std::string item_id;
  std::optional<double> rating;

  bool operator==(const RawInteraction&) const = default;
};

struct Interaction {
  Index user = 0;
  Index item = 0;

  auto operator<=>(const Interaction&) const = default;
};

// Bijection between original string ids and dense 0-based indices. Indices
// follow the lexicographic order of the ids.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(Index i) const { return ids_.at(i); }
  std::optional<Index> find(const std::string& id) const;
  Index at(const std::string& id) const;
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> index_;
};

// Sorted per-user item lists in compressed row form.
class UserItemLists {
 public:
  UserItemLists() = default;
  UserItemLists(std::size_t num_users, std::span<const Interaction> sorted_pairs);

  std::span<const Index> items(Index user) const {
    return {items_.data() + offsets_[user], offsets_[user + 1] - offsets_[user]};
  }
  bool contains(Index user, Index item) const;
  std::size_t num_users() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> items_;
};

enum class SplitMode { kPerUser, kGlobal };

struct SplitConfig {
  double train_fraction = 0.72;
  double test_fraction = 0.20;
  double val_fraction = 0.08;
  std::uint64_t seed = 42;
  SplitMode mode = SplitMode::kPerUser;

  // Fractions in [0,1], summing to 1 within 1e-9, train fraction > 0.
  void validate() const;
};

enum class Split { kTrain, kVal, kTest };

struct InteractionDataset {
  IdMap users;
  IdMap items;
  // Each sorted by (user, item) and pairwise disjoint.
  std::vector<Interaction> train;
  std::vector<Interaction> val;
  std::vector<Interaction> test;

  UserItemLists train_lists;
  UserItemLists val_lists;
  UserItemLists test_lists;

  // Held-out interactions moved into train so that every user and item keeps
  // at least one training interaction.
  std::size_t repaired_to_train = 0;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }

  const std::vector<Interaction>& pairs(Split s) const;
  const UserItemLists& lists(Split s) const;

  // Recomputes the per-user lists after train/val/test changed.
  void rebuild_lists();

  // Throws kInternal when a dataset invariant is violated.
  void check_invariants() const;
};

// Parses "user\titem[\trating]..." lines. Extra trailing columns are ignored;
// blank lines are skipped. A malformed line aborts with its line number.
std::vector<RawInteraction> load_interactions(const std::filesystem::path& path, bool has_rating);

// Keeps interactions whose rating is >= threshold.
std::vector<RawInteraction> binarize(const std::vector<RawInteraction>& interactions,
                                     double threshold);

// Collapses duplicate (user, item) pairs, drops ratings, sorts by (user, item).
std::vector<RawInteraction> deduplicate(const std::vector<RawInteraction>& interactions);

// Iterative k-core over the bipartite user/item graph of distinct pairs. The
// result is sorted and duplicate-free. Throws kEmptyCore when nothing survives.
std::vector<RawInteraction> k_core_filter(const std::vector<RawInteraction>& interactions,
                                          std::size_t k);

InteractionDataset split(const std::vector<RawInteraction>& interactions,
                         const SplitConfig& config);

// Split files: train.tsv, val.tsv, test.tsv with "user_id\titem_id" rows.
void write_split_files(const std::filesystem::path& dir, const InteractionDataset& dataset);
InteractionDataset read_split_files(const std::filesystem::path& dir);

}  // namespace kguf::data
