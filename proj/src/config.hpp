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
#include <string>
#include <vector>

#include <json.hpp>

#include "data.hpp"
#include "model.hpp"
#include "treefilter.hpp"

namespace kguf::config {

struct SweepSpace {
  std::size_t trials = 20;
  bool grid = false;
  std::uint64_t seed = 7;
  std::vector<double> learning_rate;
  std::vector<double> lambda;
  std::vector<double> alpha;
  std::vector<std::size_t> layers;
  std::vector<double> eta;
  std::vector<std::size_t> max_depth;  // 0 = unlimited
};

// Typed view of the configuration document.
struct RunSettings {
  std::filesystem::path interactions;
  std::filesystem::path kg;
  std::filesystem::path linking;
  std::filesystem::path output_dir;

  bool has_rating = true;
  std::optional<double> threshold;
  std::size_t k_core = 5;
  data::SplitConfig split;

  std::size_t min_feature_items = 1;
  tree::TreeConfig tree;
  std::vector<std::uint64_t> tree_seeds;

  std::size_t dim = 64;
  model::TrainConfig train;
  std::size_t checkpoint_every = 1;

  SweepSpace sweep;
};

// The configuration is a JSON document with sections paths, data, kg, tree,
// model, eval and sweep. Every key has a default; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  static RunConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();

  // Relative paths inside the file resolve against the file's directory.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_json(const nlohmann::json& doc,
                             const std::filesystem::path& base_dir = {});

  // Dotted key, e.g. "model.alpha". The value is parsed according to the
  // type of the key's default; "null" clears nullable keys. Relative paths
  // resolve against the current directory.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  const nlohmann::json& document() const { return doc_; }
  std::string dump() const { return doc_.dump(2) + "\n"; }

  // 16 hex digits of a hash over the canonical document.
  std::string hash() const;

  RunSettings settings() const;

 private:
  nlohmann::json doc_;
};

nlohmann::json default_document();

}  // namespace kguf::config
