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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "data.hpp"

namespace kguf::kg {

using FeatureIndex = std::uint32_t;

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

// A <predicate, object> pair describing an item.
struct SemanticFeature {
  std::string predicate;
  std::string object;

  auto operator<=>(const SemanticFeature&) const = default;
};

// Sorted, duplicate-free triples.
std::vector<Triple> load_kg(const std::filesystem::path& path);

// item_id -> entity. Repeating an identical line is fine; linking one item to
// two different entities is a parse error.
std::map<std::string, std::string> load_linking(const std::filesystem::path& path);

struct ItemFeatureIndex {
  // Interned features; the dense index is the position in this vector, which
  // follows (predicate, object) order.
  std::vector<SemanticFeature> features;
  // F_i per item index, sorted.
  std::vector<std::vector<FeatureIndex>> features_of;
  // Inverse of features_of, sorted.
  std::vector<std::vector<data::Index>> items_of;

  std::size_t num_features() const { return features.size(); }
  std::size_t num_items() const { return features_of.size(); }
  std::optional<FeatureIndex> find(const SemanticFeature& f) const;

  void check_invariants() const;
};

struct ExtractOptions {
  // Features attached to fewer items than this are dropped. 1 keeps everything.
  std::size_t min_items = 1;
};

// One-hop features: for an item linked to entity e, every (relation, tail) of
// a triple whose head is e. Items without a linking get an empty set.
ItemFeatureIndex extract_features(const std::vector<Triple>& triples,
                                  const std::map<std::string, std::string>& linking,
                                  const data::InteractionDataset& dataset,
                                  const ExtractOptions& options = {});

// features.tsv: "index\tpredicate\tobject\tnum_items".
void write_feature_table(const std::filesystem::path& path, const ItemFeatureIndex& index);
std::vector<SemanticFeature> read_feature_table(const std::filesystem::path& path);

}  // namespace kguf::kg
