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
#include "kg.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "error.hpp"
#include "log.hpp"
#include "textio.hpp"

namespace kguf::kg {

std::vector<Triple> load_kg(const std::filesystem::path& path) {
  std::vector<Triple> triples;
  std::size_t lines = 0;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty()) return;
    auto cols = text::split(line);
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() || cols[2].empty()) {
      fail(ErrorCode::kParse,
           path.string() + ":" + std::to_string(n) + ": expected head\\trelation\\ttail");
    }
    triples.push_back({std::string(cols[0]), std::string(cols[1]), std::string(cols[2])});
    ++lines;
  });
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  log::info("kg: " + std::to_string(lines) + " lines, " + std::to_string(triples.size()) +
            " distinct triples");
  return triples;
}

std::map<std::string, std::string> load_linking(const std::filesystem::path& path) {
  std::map<std::string, std::string> linking;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty()) return;
    auto cols = text::split(line);
    auto where = path.string() + ":" + std::to_string(n) + ": ";
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      fail(ErrorCode::kParse, where + "expected item_id\\tentity");
    auto [it, inserted] = linking.emplace(std::string(cols[0]), std::string(cols[1]));
    if (!inserted && it->second != cols[1]) {
      fail(ErrorCode::kParse, where + "item '" + it->first + "' linked to both '" + it->second +
                                  "' and '" + std::string(cols[1]) + "'");
    }
  });
  return linking;
}

std::optional<FeatureIndex> ItemFeatureIndex::find(const SemanticFeature& f) const {
  auto it = std::lower_bound(features.begin(), features.end(), f);
  if (it == features.end() || *it != f) return std::nullopt;
  return static_cast<FeatureIndex>(it - features.begin());
}

void ItemFeatureIndex::check_invariants() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInternal, std::string("feature index invariant violated: ") + what);
  };
  check(items_of.size() == features.size(), "items_of size");
  std::size_t forward = 0, backward = 0;
  for (std::size_t i = 0; i < features_of.size(); ++i) {
    const auto& fs = features_of[i];
    check(std::is_sorted(fs.begin(), fs.end()), "features_of unsorted");
    for (FeatureIndex f : fs) {
      check(f < features.size(), "feature range");
      check(std::binary_search(items_of[f].begin(), items_of[f].end(),
                               static_cast<data::Index>(i)),
            "items_of missing item");
    }
    forward += fs.size();
  }
  for (const auto& items : items_of) {
    check(!items.empty(), "feature attached to no item");
    backward += items.size();
  }
  check(forward == backward, "features_of / items_of not inverse");
}

ItemFeatureIndex extract_features(const std::vector<Triple>& triples,
                                  const std::map<std::string, std::string>& linking,
                                  const data::InteractionDataset& dataset,
                                  const ExtractOptions& options) {
  const std::size_t num_items = dataset.num_items();

  std::map<std::string, std::vector<data::Index>> items_by_entity;
  std::size_t unknown = 0;
  for (const auto& [item_id, entity] : linking) {
    if (auto idx = dataset.items.find(item_id)) {
      items_by_entity[entity].push_back(*idx);
    } else {
      ++unknown;
    }
  }
  if (unknown > 0) {
    log::warn("kg: " + std::to_string(unknown) +
              " linked item ids are not in the dataset and were ignored");
  }

  // Sorted by head, each entity's outgoing edges are contiguous.
  std::vector<Triple> sorted_copy;
  const std::vector<Triple>* sorted = &triples;
  if (!std::is_sorted(triples.begin(), triples.end())) {
    sorted_copy = triples;
    std::sort(sorted_copy.begin(), sorted_copy.end());
    sorted = &sorted_copy;
  }
  std::map<SemanticFeature, std::set<data::Index>> raw;
  for (const auto& [entity, items] : items_by_entity) {
    auto lo = std::lower_bound(sorted->begin(), sorted->end(), entity,
                               [](const Triple& t, const std::string& e) { return t.head < e; });
    for (auto it = lo; it != sorted->end() && it->head == entity; ++it) {
      auto& bucket = raw[{it->relation, it->tail}];
      bucket.insert(items.begin(), items.end());
    }
  }

  ItemFeatureIndex index;
  index.features_of.resize(num_items);
  std::size_t dropped = 0;
  for (auto& [feature, items] : raw) {
    if (items.size() < options.min_items) {
      ++dropped;
      continue;
    }
    auto f = static_cast<FeatureIndex>(index.features.size());
    index.features.push_back(feature);
    index.items_of.emplace_back(items.begin(), items.end());
    for (data::Index i : items) index.features_of[i].push_back(f);
  }
  if (dropped > 0) {
    log::info("kg: dropped " + std::to_string(dropped) + " features attached to fewer than " +
              std::to_string(options.min_items) + " items");
  }
  std::size_t featureless = std::count_if(index.features_of.begin(), index.features_of.end(),
                                          [](const auto& fs) { return fs.empty(); });
  log::info("kg: " + std::to_string(index.features.size()) + " features over " +
            std::to_string(num_items) + " items (" + std::to_string(featureless) +
            " items without features)");
  return index;
}

void write_feature_table(const std::filesystem::path& path, const ItemFeatureIndex& index) {
  std::ostringstream os;
  os << "index\tpredicate\tobject\tnum_items\n";
  for (std::size_t f = 0; f < index.features.size(); ++f) {
    os << f << '\t' << index.features[f].predicate << '\t' << index.features[f].object << '\t'
       << index.items_of[f].size() << '\n';
  }
  text::write_file(path, os.str());
}

std::vector<SemanticFeature> read_feature_table(const std::filesystem::path& path) {
  std::vector<SemanticFeature> out;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (n == 1 || line.empty()) return;
    auto cols = text::split(line);
    auto idx = cols.size() == 4 ? text::parse_uint(cols[0]) : std::nullopt;
    if (!idx || *idx != out.size())
      fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": bad feature row");
    out.push_back({std::string(cols[1]), std::string(cols[2])});
  });
  return out;
}

}  // namespace kguf::kg
