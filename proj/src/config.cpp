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
#include "config.hpp"

#include <cmath>

#include "error.hpp"
#include "textio.hpp"

namespace kguf::config {

using json = nlohmann::json;

json default_document() {
  return json{
      {"paths",
       {{"interactions", ""}, {"kg", ""}, {"linking", ""}, {"output_dir", "runs"}}},
      {"data",
       {{"has_rating", true},
        {"threshold", 3.0},
        {"k_core", 5},
        {"split",
         {{"train", 0.72}, {"test", 0.20}, {"val", 0.08}, {"mode", "per_user"}, {"seed", 42}}}}},
      {"kg", {{"min_feature_items", 1}}},
      {"tree",
       {{"eta", 1.0},
        {"max_depth", 0},
        {"min_samples_split", 2},
        {"seed", 42},
        {"seeds", json::array({42, 43, 44, 45, 46})},
        {"strict_negatives", false}}},
      {"model",
       {{"dim", 64},
        {"alpha", 0.4},
        {"layers", 3},
        {"lambda", 1e-4},
        {"learning_rate", 1e-3},
        {"batch_size", 64},
        {"max_epochs", 200},
        {"patience", 5},
        {"seed", 42},
        {"optimizer", "adam"},
        {"reg_mode", "full"},
        {"empty_feature_policy", "collaborative_only"},
        {"checkpoint_every", 1}}},
      {"eval", {{"k", 10}, {"strict", false}}},
      {"sweep",
       {{"trials", 20},
        {"mode", "random"},
        {"seed", 7},
        {"learning_rate", json::array({1e-4, 5e-4, 1e-3, 5e-3, 1e-2})},
        {"lambda", json::array({1e-5, 1e-4, 1e-3, 1e-2})},
        {"alpha", json::array({0.2, 0.4, 0.6, 0.8})},
        {"layers", json::array({1, 2, 3})},
        {"eta", json::array({1, 2, 5, 10, 20})},
        {"max_depth", json::array({1, 2, 5, 10, 15, 20, 0})}}},
  };
}

namespace {

const char* kPathKeys[] = {"interactions", "kg", "linking", "output_dir"};

void merge_checked(json& target, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) fail(ErrorCode::kParse, "config section '" + prefix + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!target.contains(it.key())) fail(ErrorCode::kParse, "unknown config key '" + key + "'");
    auto& slot = target[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

json* locate(json& doc, const std::string& key) {
  json* node = &doc;
  for (auto part : text::split(key, '.')) {
    std::string p(part);
    if (!node->is_object() || !node->contains(p)) return nullptr;
    node = &(*node)[p];
  }
  return node;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative()) path = (base.empty() ? std::filesystem::current_path() : base) / path;
  return path.lexically_normal();
}

void resolve_paths(json& doc, const std::filesystem::path& base) {
  for (const char* k : kPathKeys) {
    auto& v = doc["paths"][k];
    if (v.is_string()) v = resolve(v.get<std::string>(), base).string();
  }
}

json parse_scalar_like(const json& current, const std::string& key, const std::string& value) {
  if (value == "null") return nullptr;
  auto bad = [&] { fail(ErrorCode::kInvalidArgument, "bad value '" + value + "' for " + key); };
  if (current.is_boolean()) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad();
  }
  if (current.is_number_integer() || current.is_number_unsigned()) {
    if (value == "inf" || value == "unlimited") return 0;
    auto v = text::parse_uint(value);
    if (!v) bad();
    return *v;
  }
  if (current.is_number() || current.is_null()) {
    auto v = text::parse_double(value);
    if (!v) bad();
    return *v;
  }
  if (current.is_array()) {
    json arr = json::array();
    const json& proto = current.empty() ? json(0.0) : current.front();
    for (auto part : text::split(value, ',')) arr.push_back(parse_scalar_like(proto, key, std::string(part)));
    return arr;
  }
  return value;
}

template <typename T>
T get_num(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kParse, std::string("config value ") + what + " has the wrong type");
  }
}

std::size_t get_count(const json& j, const char* what) {
  if (j.is_null()) return 0;
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "unlimited") return 0;
  }
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (v < 0 || v != std::floor(v)) fail(ErrorCode::kParse, std::string(what) + " must be a count");
    return static_cast<std::size_t>(v);
  }
  if (j.is_number_integer() && j.get<std::int64_t>() < 0)
    fail(ErrorCode::kParse, std::string(what) + " must be a count");
  return get_num<std::size_t>(j, what);
}

}  // namespace

RunConfig::RunConfig() : doc_(default_document()) {}

std::vector<std::string> RunConfig::preset_names() {
  return {"default", "toy", "facebook_books", "yahoo_movies", "movielens_1m"};
}

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  auto& d = c.doc_;
  if (name == "default") return c;
  if (name == "facebook_books") {
    // Implicit feedback already; no rating column to binarize.
    d["data"]["has_rating"] = false;
    d["data"]["threshold"] = nullptr;
    d["model"]["batch_size"] = 64;
  } else if (name == "yahoo_movies") {
    d["model"]["batch_size"] = 256;
  } else if (name == "movielens_1m") {
    d["model"]["batch_size"] = 2048;
  } else if (name == "toy") {
    d["model"]["dim"] = 16;
    d["model"]["layers"] = 2;
    d["model"]["learning_rate"] = 0.01;
    d["model"]["lambda"] = 1e-4;
    d["model"]["batch_size"] = 32;
    d["model"]["max_epochs"] = 100;
    d["model"]["patience"] = 10;
    d["eval"]["strict"] = true;
    d["sweep"]["trials"] = 4;
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown preset '" + name + "'");
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  merge_checked(c.doc_, doc, "");
  resolve_paths(c.doc_, base_dir);
  c.settings();  // validates
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text::read_file(path), nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  if (doc.contains("preset")) {
    RunConfig c = preset(doc["preset"].get<std::string>());
    doc.erase("preset");
    merge_checked(c.doc_, doc, "");
    resolve_paths(c.doc_, base);
    c.settings();
    return c;
  }
  return from_json(doc, base);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  json* slot = locate(doc_, key);
  if (!slot || slot->is_object()) fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  nlohmann::json previous = *slot;
  if (key.rfind("paths.", 0) == 0) {
    *slot = resolve(value, {}).string();
  } else if (key == "data.threshold" && value != "null") {
    auto v = text::parse_double(value);
    if (!v) fail(ErrorCode::kInvalidArgument, "bad value '" + value + "' for " + key);
    *slot = *v;
  } else {
    *slot = parse_scalar_like(previous, key, value);
  }
  try {
    settings();
  } catch (...) {
    *slot = previous;
    throw;
  }
}

std::string RunConfig::get(const std::string& key) const {
  nlohmann::json copy = doc_;
  json* slot = locate(copy, key);
  if (!slot) fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  if (slot->is_string()) return slot->get<std::string>();
  return slot->dump();
}

std::string RunConfig::hash() const { return text::hex64(text::fnv1a(doc_.dump())); }

RunSettings RunConfig::settings() const {
  const auto& d = doc_;
  RunSettings s;
  auto path = [](const nlohmann::json& j) { return std::filesystem::path(j.get<std::string>()); };
  try {
    s.interactions = path(d["paths"]["interactions"]);
    s.kg = path(d["paths"]["kg"]);
    s.linking = path(d["paths"]["linking"]);
    s.output_dir = path(d["paths"]["output_dir"]);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kParse, "config paths must be strings");
  }

  const auto& data = d["data"];
  s.has_rating = get_num<bool>(data["has_rating"], "data.has_rating");
  if (!data["threshold"].is_null()) s.threshold = get_num<double>(data["threshold"], "data.threshold");
  s.k_core = get_count(data["k_core"], "data.k_core");
  require(s.k_core >= 1, "data.k_core must be >= 1");
  const auto& sp = data["split"];
  s.split.train_fraction = get_num<double>(sp["train"], "data.split.train");
  s.split.test_fraction = get_num<double>(sp["test"], "data.split.test");
  s.split.val_fraction = get_num<double>(sp["val"], "data.split.val");
  s.split.seed = get_num<std::uint64_t>(sp["seed"], "data.split.seed");
  const auto mode = get_num<std::string>(sp["mode"], "data.split.mode");
  require(mode == "per_user" || mode == "global", "data.split.mode must be per_user or global");
  s.split.mode = mode == "global" ? data::SplitMode::kGlobal : data::SplitMode::kPerUser;
  s.split.validate();

  s.min_feature_items = get_count(d["kg"]["min_feature_items"], "kg.min_feature_items");
  require(s.min_feature_items >= 1, "kg.min_feature_items must be >= 1");

  const auto& t = d["tree"];
  s.tree.eta = get_num<double>(t["eta"], "tree.eta");
  s.tree.max_depth = get_count(t["max_depth"], "tree.max_depth");
  s.tree.min_samples_split = get_count(t["min_samples_split"], "tree.min_samples_split");
  s.tree.seed = get_num<std::uint64_t>(t["seed"], "tree.seed");
  s.tree.strict_negatives = get_num<bool>(t["strict_negatives"], "tree.strict_negatives");
  s.tree_seeds = get_num<std::vector<std::uint64_t>>(t["seeds"], "tree.seeds");
  s.tree.validate();

  const auto& m = d["model"];
  s.dim = get_count(m["dim"], "model.dim");
  require(s.dim >= 1, "model.dim must be >= 1");
  auto& tr = s.train;
  tr.alpha = get_num<double>(m["alpha"], "model.alpha");
  tr.layers = get_count(m["layers"], "model.layers");
  tr.lambda = get_num<double>(m["lambda"], "model.lambda");
  tr.learning_rate = get_num<double>(m["learning_rate"], "model.learning_rate");
  tr.batch_size = get_count(m["batch_size"], "model.batch_size");
  tr.max_epochs = get_count(m["max_epochs"], "model.max_epochs");
  tr.patience = get_count(m["patience"], "model.patience");
  tr.seed = get_num<std::uint64_t>(m["seed"], "model.seed");
  const auto opt = get_num<std::string>(m["optimizer"], "model.optimizer");
  require(opt == "adam" || opt == "sgd", "model.optimizer must be adam or sgd");
  tr.optimizer = opt == "adam" ? model::OptimizerKind::kAdam : model::OptimizerKind::kSgd;
  const auto reg = get_num<std::string>(m["reg_mode"], "model.reg_mode");
  require(reg == "full" || reg == "batch", "model.reg_mode must be full or batch");
  tr.reg_mode = reg == "full" ? model::RegMode::kFull : model::RegMode::kBatch;
  const auto pol = get_num<std::string>(m["empty_feature_policy"], "model.empty_feature_policy");
  require(pol == "collaborative_only" || pol == "keep_weight",
          "model.empty_feature_policy must be collaborative_only or keep_weight");
  tr.empty_policy = pol == "collaborative_only" ? graph::EmptyFeaturePolicy::kCollaborativeOnly
                                                : graph::EmptyFeaturePolicy::kKeepWeight;
  s.checkpoint_every = get_count(m["checkpoint_every"], "model.checkpoint_every");
  tr.eval_k = get_count(d["eval"]["k"], "eval.k");
  tr.strict_eval = get_num<bool>(d["eval"]["strict"], "eval.strict");
  tr.validate();

  const auto& sw = d["sweep"];
  s.sweep.trials = get_count(sw["trials"], "sweep.trials");
  const auto smode = get_num<std::string>(sw["mode"], "sweep.mode");
  require(smode == "random" || smode == "grid", "sweep.mode must be random or grid");
  s.sweep.grid = smode == "grid";
  s.sweep.seed = get_num<std::uint64_t>(sw["seed"], "sweep.seed");
  s.sweep.learning_rate = get_num<std::vector<double>>(sw["learning_rate"], "sweep.learning_rate");
  s.sweep.lambda = get_num<std::vector<double>>(sw["lambda"], "sweep.lambda");
  s.sweep.alpha = get_num<std::vector<double>>(sw["alpha"], "sweep.alpha");
  s.sweep.eta = get_num<std::vector<double>>(sw["eta"], "sweep.eta");
  for (const auto& v : sw["layers"]) s.sweep.layers.push_back(get_count(v, "sweep.layers"));
  for (const auto& v : sw["max_depth"]) s.sweep.max_depth.push_back(get_count(v, "sweep.max_depth"));
  for (const auto* list : {&s.sweep.learning_rate, &s.sweep.lambda, &s.sweep.alpha, &s.sweep.eta})
    require(!list->empty(), "sweep value lists must not be empty");
  require(!s.sweep.layers.empty() && !s.sweep.max_depth.empty(),
          "sweep value lists must not be empty");
  return s;
}

}  // namespace kguf::config
