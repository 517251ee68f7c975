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
// Builders for small in-memory fixtures shared by the test binaries.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "data.hpp"
#include "kg.hpp"
#include "rng.hpp"

namespace kguf::testing {

inline std::string padded(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, n);
  return buf;
}

// Zero-padded ids keep lexicographic order equal to numeric order.
inline data::InteractionDataset make_dataset(std::size_t users, std::size_t items,
                                             std::vector<data::Interaction> train,
                                             std::vector<data::Interaction> val = {},
                                             std::vector<data::Interaction> test = {}) {
  data::InteractionDataset ds;
  std::vector<std::string> u, i;
  for (std::size_t k = 0; k < users; ++k) u.push_back(padded("u", k));
  for (std::size_t k = 0; k < items; ++k) i.push_back(padded("i", k));
  ds.users = data::IdMap(u);
  ds.items = data::IdMap(i);
  for (auto* v : {&train, &val, &test}) std::sort(v->begin(), v->end());
  ds.train = std::move(train);
  ds.val = std::move(val);
  ds.test = std::move(test);
  ds.rebuild_lists();
  return ds;
}

// Random bipartite train set in which every user and item has an edge.
// Remaining pairs are spread over val and test with the given probabilities.
inline data::InteractionDataset random_dataset(Rng& rng, std::size_t users, std::size_t items,
                                               double density, double p_val = 0.0,
                                               double p_test = 0.0) {
  std::set<data::Interaction> train;
  for (std::size_t u = 0; u < users; ++u)
    train.insert({static_cast<data::Index>(u), static_cast<data::Index>(rng.below(items))});
  for (std::size_t i = 0; i < items; ++i)
    train.insert({static_cast<data::Index>(rng.below(users)), static_cast<data::Index>(i)});
  std::vector<data::Interaction> val, test;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t i = 0; i < items; ++i) {
      data::Interaction p{static_cast<data::Index>(u), static_cast<data::Index>(i)};
      if (train.count(p)) continue;
      double r = rng.uniform01();
      if (r < density) {
        train.insert(p);
      } else if (r < density + p_val) {
        val.push_back(p);
      } else if (r < density + p_val + p_test) {
        test.push_back(p);
      }
    }
  }
  return make_dataset(users, items, {train.begin(), train.end()}, val, test);
}

// Random F_i over `num_features` features with presence probability p.
// Features used by no item are dropped so the index stays consistent.
inline kg::ItemFeatureIndex random_features(Rng& rng, std::size_t items, std::size_t num_features,
                                            double p) {
  std::vector<std::vector<std::size_t>> raw(items);
  std::vector<bool> used(num_features, false);
  for (std::size_t i = 0; i < items; ++i)
    for (std::size_t f = 0; f < num_features; ++f)
      if (rng.uniform01() < p) {
        raw[i].push_back(f);
        used[f] = true;
      }
  std::vector<std::size_t> remap(num_features, 0);
  kg::ItemFeatureIndex idx;
  for (std::size_t f = 0; f < num_features; ++f) {
    if (!used[f]) continue;
    remap[f] = idx.features.size();
    idx.features.push_back({"p", padded("o", f)});
  }
  idx.features_of.resize(items);
  idx.items_of.resize(idx.features.size());
  for (std::size_t i = 0; i < items; ++i)
    for (auto f : raw[i]) {
      idx.features_of[i].push_back(static_cast<kg::FeatureIndex>(remap[f]));
      idx.items_of[remap[f]].push_back(static_cast<data::Index>(i));
    }
  return idx;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("kguf-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace kguf::testing
