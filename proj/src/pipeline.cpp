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
#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <numeric>

#include <json.hpp>

#include "data.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "kg.hpp"
#include "log.hpp"
#include "model.hpp"
#include "textio.hpp"
#include "treefilter.hpp"

namespace kguf::pipeline {

using nlohmann::json;

namespace {

const std::vector<double> kEtaPreset = {1, 2, 5, 10, 20};
const std::vector<std::size_t> kDepthPreset = {1, 2, 5, 10, 15, 20, 0};
const std::vector<double> kAlphaPreset = {0.2, 0.4, 0.6, 0.8};

fs::path split_dir(const fs::path& run) { return run / "split"; }

void require_file(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) fail(ErrorCode::kIo, "missing " + p.string() + " (" + hint + ")");
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + p.string() + ": " + ec.message());
}

std::string depth_label(std::size_t d) { return d == 0 ? "inf" : std::to_string(d); }

std::string num(double v) { return text::format_double(v); }

void write_json(const fs::path& p, const json& j) { text::write_file(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  try {
    return json::parse(text::read_file(p));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, p.string() + ": " + e.what());
  }
}

config::RunConfig with(const config::RunConfig& base,
                       std::initializer_list<std::pair<const char*, std::string>> overrides) {
  config::RunConfig c = base;
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

data::InteractionDataset load_split(const fs::path& run_dir) {
  require_file(split_dir(run_dir) / "manifest.json", "run preprocess first");
  return data::read_split_files(split_dir(run_dir));
}

std::vector<std::string> feature_ids(const graph::ItemKnowledge& knowledge) {
  std::vector<std::string> ids;
  ids.reserve(knowledge.num_rows());
  for (auto f : knowledge.feature_of_row) ids.push_back(std::to_string(f));
  return ids;
}

json metrics_json(const eval::RankingResult& r) {
  return {{"ndcg", r.ndcg}, {"hr", r.hr}, {"recall", r.recall}, {"users", r.users.size()}};
}

json distribution_json(const eval::RankingResult& r) {
  json out;
  auto summary = [](const std::vector<double>& v) {
    return json{{"min", eval::quantile(v, 0.0)},  {"p25", eval::quantile(v, 0.25)},
                {"median", eval::quantile(v, 0.5)}, {"p75", eval::quantile(v, 0.75)},
                {"max", eval::quantile(v, 1.0)}};
  };
  std::vector<double> nd, hr, rc;
  for (const auto& u : r.users) {
    nd.push_back(u.ndcg);
    hr.push_back(u.hr);
    rc.push_back(u.recall);
  }
  out["ndcg"] = summary(nd);
  out["hr"] = summary(hr);
  out["recall"] = summary(rc);
  return out;
}

Metrics to_metrics(const eval::RankingResult& r) { return {r.ndcg, r.hr, r.recall, r.users.size()}; }

}  // namespace

fs::path default_run_dir(const config::RunConfig& cfg) {
  const auto s = cfg.settings();
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  fs::path base = s.output_dir.empty() ? fs::current_path() / "runs" : s.output_dir;
  fs::path dir = base / (cfg.hash() + "-" + stamp);
  for (int n = 1; fs::exists(dir); ++n) dir = base / (cfg.hash() + "-" + stamp + "-" + std::to_string(n));
  return dir;
}

PreprocessStats preprocess(const config::RunConfig& cfg, const fs::path& run_dir) {
  const auto s = cfg.settings();
  if (s.interactions.empty()) fail(ErrorCode::kInvalidArgument, "paths.interactions is not set");
  if (!fs::exists(s.interactions))
    fail(ErrorCode::kIo, "interactions file not found: " + s.interactions.string());

  PreprocessStats st;
  auto raw = data::load_interactions(s.interactions, s.has_rating);
  st.raw = raw.size();
  if (s.has_rating && s.threshold) raw = data::binarize(raw, *s.threshold);
  st.binarized = raw.size();
  auto dedup = data::deduplicate(raw);
  st.deduplicated = dedup.size();
  auto cored = data::k_core_filter(dedup, s.k_core);
  st.cored = cored.size();
  auto ds = data::split(cored, s.split);
  ds.check_invariants();
  st.users = ds.num_users();
  st.items = ds.num_items();
  st.train = ds.train.size();
  st.val = ds.val.size();
  st.test = ds.test.size();
  st.repaired = ds.repaired_to_train;

  const auto dir = split_dir(run_dir);
  ensure_dir(dir);
  data::write_split_files(dir, ds);

  json m;
  m["toolkit_version"] = kVersion;
  m["config_hash"] = cfg.hash();
  m["inputs"] = {{"interactions",
                  {{"path", s.interactions.string()}, {"digest", text::file_digest(s.interactions)}}}};
  m["counts"] = {{"raw", st.raw},           {"binarized", st.binarized},
                 {"deduplicated", st.deduplicated}, {"k_core", st.cored},
                 {"users", st.users},       {"items", st.items},
                 {"train", st.train},       {"val", st.val},
                 {"test", st.test},         {"repaired_to_train", st.repaired}};
  m["settings"] = cfg.document()["data"];
  json outputs;
  for (const char* f : {"train.tsv", "val.tsv", "test.tsv"}) outputs[f] = text::file_digest(dir / f);
  m["outputs"] = outputs;
  write_json(dir / "manifest.json", m);
  log::info("preprocess: " + std::to_string(st.cored) + " interactions, " +
            std::to_string(st.users) + " users, " + std::to_string(st.items) + " items");
  return st;
}

TreeStats build_trees(const config::RunConfig& cfg, const fs::path& run_dir,
                      const fs::path& out_dir) {
  const auto s = cfg.settings();
  const auto ds = load_split(run_dir);

  std::vector<kg::Triple> triples;
  if (s.kg.empty()) {
    log::warn("no knowledge graph configured; every item keeps an empty feature set");
  } else {
    if (!fs::exists(s.kg)) fail(ErrorCode::kIo, "kg file not found: " + s.kg.string());
    triples = kg::load_kg(s.kg);
    if (triples.empty()) log::warn("knowledge graph is empty; every item keeps an empty feature set");
  }
  std::map<std::string, std::string> linking;
  if (s.linking.empty()) {
    if (!triples.empty()) log::warn("no item linking configured; items get no features");
  } else {
    if (!fs::exists(s.linking)) fail(ErrorCode::kIo, "linking file not found: " + s.linking.string());
    linking = kg::load_linking(s.linking);
  }

  auto features = kg::extract_features(triples, linking, ds, {s.min_feature_items});
  auto trees = tree::build_all_trees(ds, features, s.tree);
  auto selected = tree::compute_selected_features(trees, features, ds.num_users());

  const fs::path dir = out_dir.empty() ? run_dir / "trees" : out_dir;
  ensure_dir(dir);
  kg::write_feature_table(dir / "features.tsv", features);
  tree::write_selected_features(dir, ds, selected);

  TreeStats st;
  st.dir = dir;
  st.users_with_tree = trees.size();
  st.num_features = features.num_features();
  st.selected_features = selected.selected.size();
  st.empty_item_fraction = selected.empty_item_fraction;
  st.mean_item_features = selected.mean_item_features;
  double depth_sum = 0.0;
  for (const auto& t : trees) depth_sum += static_cast<double>(t.depth());
  st.mean_tree_depth = trees.empty() ? 0.0 : depth_sum / static_cast<double>(trees.size());

  std::size_t linked_with_features = 0;
  double all_sum = 0.0;
  for (const auto& f : features.features_of) {
    linked_with_features += f.empty() ? 0 : 1;
    all_sum += static_cast<double>(f.size());
  }
  json c;
  c["toolkit_version"] = kVersion;
  c["config_hash"] = cfg.hash();
  c["tree"] = cfg.document()["tree"];
  c["kg"] = cfg.document()["kg"];
  c["inputs"] = {{"kg", {{"path", s.kg.string()}, {"digest", text::file_digest(s.kg)}}},
                 {"linking", {{"path", s.linking.string()}, {"digest", text::file_digest(s.linking)}}},
                 {"split_manifest", text::file_digest(split_dir(run_dir) / "manifest.json")}};
  c["triples"] = triples.size();
  c["features"] = st.num_features;
  c["items_with_features"] = linked_with_features;
  c["mean_item_features_before_filter"] = ds.num_items() ? all_sum / static_cast<double>(ds.num_items()) : 0.0;
  c["users_with_tree"] = st.users_with_tree;
  c["users_without_tree"] = ds.num_users() - st.users_with_tree;
  c["selected_features"] = st.selected_features;
  c["empty_item_fraction"] = st.empty_item_fraction;
  c["mean_item_features"] = st.mean_item_features;
  c["mean_tree_depth"] = st.mean_tree_depth;
  c["outputs"] = {{"item_selected.tsv", text::file_digest(dir / "item_selected.tsv")},
                  {"user_trees.tsv", text::file_digest(dir / "user_trees.tsv")},
                  {"features.tsv", text::file_digest(dir / "features.tsv")}};
  write_json(dir / "coverage.json", c);
  log::info("trees: " + std::to_string(st.selected_features) + " of " +
            std::to_string(st.num_features) + " features selected, " +
            num(st.empty_item_fraction) + " of items without features");
  return st;
}

std::vector<TreeStats> build_tree_preset(const config::RunConfig& cfg, const fs::path& run_dir,
                                         const std::string& preset) {
  std::vector<TreeStats> out;
  if (preset == "eta") {
    for (double eta : kEtaPreset)
      out.push_back(build_trees(with(cfg, {{"tree.eta", num(eta)}}), run_dir,
                                run_dir / ("trees-eta-" + num(eta))));
  } else if (preset == "depth") {
    for (auto d : kDepthPreset)
      out.push_back(build_trees(with(cfg, {{"tree.max_depth", std::to_string(d)}}), run_dir,
                                run_dir / ("trees-depth-" + depth_label(d))));
  } else if (preset == "seeds") {
    for (auto seed : cfg.settings().tree_seeds)
      out.push_back(build_trees(with(cfg, {{"tree.seed", std::to_string(seed)}}), run_dir,
                                run_dir / ("trees-seed-" + std::to_string(seed))));
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown tree preset '" + preset + "' (eta, depth, seeds)");
  }
  return out;
}

TrainStats train(const config::RunConfig& cfg, const fs::path& run_dir,
                 const TrainOptions& options) {
  const auto s = cfg.settings();
  const auto ds = load_split(run_dir);
  const fs::path trees_dir = options.trees_dir.empty() ? run_dir / "trees" : options.trees_dir;
  require_file(trees_dir / "item_selected.tsv", "run build-trees first");
  const auto item_features = tree::read_item_selected(trees_dir / "item_selected.tsv", ds);
  const auto knowledge = graph::ItemKnowledge::from_item_features(item_features);
  const auto graph = graph::build_graph(ds);
  const model::TrainingContext ctx{ds, graph, knowledge, s.train};

  const fs::path out = options.out_dir.empty() ? run_dir / "train" : options.out_dir;
  const fs::path ckpt = out / "checkpoint";
  const model::EmbeddingIds ids{ds.users.ids(), ds.items.ids(), feature_ids(knowledge)};

  TrainStats st;
  st.dir = out;
  model::TrainState state;
  if (options.resume && fs::exists(ckpt / "state" / "trainer.json")) {
    const auto echo = read_json(ckpt / "config.json");
    if (echo != cfg.document())
      fail(ErrorCode::kMismatch, "cannot resume: " + ckpt.string() + " was written with a different config");
    state = model::load_checkpoint(ckpt, s.train);
    if (state.params.dim() != s.dim || state.params.users.rows() != ds.num_users() ||
        state.params.items.rows() != ds.num_items() ||
        state.params.features.rows() != knowledge.num_rows())
      fail(ErrorCode::kMismatch, "cannot resume: checkpoint shapes differ from the data");
    st.resumed = true;
    log::info("resuming from epoch " + std::to_string(state.epoch));
  } else {
    ensure_dir(ckpt);
    state = model::start_training(ctx, s.dim);
    write_json(ckpt / "config.json", cfg.document());
    fs::copy_file(trees_dir / "item_selected.tsv", ckpt / "item_selected.tsv",
                  fs::copy_options::overwrite_existing);
    model::save_checkpoint(ckpt, state, ids);
    text::write_file(out / "train_log.tsv", model::format_training_log(state.log));
    text::write_file(out / "train_timing.tsv", "epoch\tseconds\n");
  }

  auto on_epoch = [&](const model::TrainState& cur) {
    text::append_file(out / "train_timing.tsv",
                      std::to_string(cur.log.back().epoch) + '\t' + num(cur.log.back().seconds) + '\n');
    if (cur.finished || s.checkpoint_every == 0 || cur.epoch % s.checkpoint_every == 0) {
      model::save_checkpoint(ckpt, cur, ids);
      text::write_file(out / "train_log.tsv", model::format_training_log(cur.log));
    }
  };
  model::continue_training(state, ctx, on_epoch);
  model::save_checkpoint(ckpt, state, ids);
  text::write_file(out / "train_log.tsv", model::format_training_log(state.log));

  auto emb = model::final_embeddings(state.best, graph, knowledge, s.train.propagation());
  model::export_embeddings(out / "embeddings", state.best, emb, ids);

  st.epochs = state.epoch;
  st.best_epoch = state.best_epoch;
  st.initial_val_ndcg = state.initial_score;
  st.best_val_ndcg = state.best_score;
  return st;
}

EvalReport evaluate(const config::RunConfig& cfg, const fs::path& run_dir,
                    const fs::path& checkpoint, const fs::path& report_path) {
  const auto s = cfg.settings();
  const auto ds = load_split(run_dir);
  const fs::path ckpt = checkpoint.empty() ? run_dir / "train" / "checkpoint" : checkpoint;
  require_file(ckpt / "params_users.tsv", "not a checkpoint directory");
  require_file(ckpt / "item_selected.tsv", "not a checkpoint directory");
  const auto params = model::load_checkpoint_params(ckpt);
  if (params.dim() != s.dim)
    fail(ErrorCode::kMismatch, "checkpoint has d=" + std::to_string(params.dim()) +
                                   " but the config says d=" + std::to_string(s.dim));
  const auto item_features = tree::read_item_selected(ckpt / "item_selected.tsv", ds);
  const auto knowledge = graph::ItemKnowledge::from_item_features(item_features);
  if (params.users.rows() != ds.num_users() || params.items.rows() != ds.num_items() ||
      params.features.rows() != knowledge.num_rows() || params.items.cols() != s.dim ||
      params.features.cols() != s.dim)
    fail(ErrorCode::kMismatch, "checkpoint shapes do not match the run's data");
  const auto graph = graph::build_graph(ds);
  const auto emb = model::final_embeddings(params, graph, knowledge, s.train.propagation());

  eval::EvalOptions opts{s.train.eval_k, s.train.strict_eval};
  const auto val = eval::evaluate(emb.users, emb.items, ds, data::Split::kVal, opts);
  const auto test = eval::evaluate(emb.users, emb.items, ds, data::Split::kTest, opts);

  json r;
  r["k"] = opts.k;
  r["protocol"] = opts.strict ? "all_unrated_strict" : "all_unrated";
  r["excluded_users"] = "users with no relevant item in a split are left out of that split's means";
  r["metrics"] = {{"val", metrics_json(val)}, {"test", metrics_json(test)}};
  r["distributions"] = {{"val", distribution_json(val)}, {"test", distribution_json(test)}};
  r["config"] = cfg.document();
  json ck;
  for (const char* f : {"params_users.tsv", "params_items.tsv", "params_features.tsv",
                        "item_selected.tsv", "config.json"})
    ck[f] = text::file_digest(ckpt / f);
  r["provenance"] = {{"toolkit_version", kVersion},
                     {"config_hash", cfg.hash()},
                     {"checkpoint", ckpt.string()},
                     {"checkpoint_digests", ck},
                     {"split_manifest", text::file_digest(split_dir(run_dir) / "manifest.json")}};

  EvalReport rep;
  rep.k = opts.k;
  rep.val = to_metrics(val);
  rep.test = to_metrics(test);
  rep.path = report_path.empty() ? run_dir / "report.json" : report_path;
  if (rep.path.has_parent_path()) ensure_dir(rep.path.parent_path());
  write_json(rep.path, r);
  return rep;
}

std::vector<SweepTrial> sweep_plan(const config::SweepSpace& space, std::size_t trials) {
  const std::size_t radix[] = {space.learning_rate.size(), space.lambda.size(), space.alpha.size(),
                               space.layers.size(),        space.eta.size(),    space.max_depth.size()};
  std::size_t total = 1;
  for (auto r : radix) total *= r;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!space.grid) {
    Rng rng(space.seed);
    rng.shuffle(order);
  }
  order.resize(std::min(trials, total));
  std::vector<SweepTrial> plan;
  for (std::size_t t = 0; t < order.size(); ++t) {
    std::size_t code = order[t];
    std::size_t digit[6];
    for (int d = 5; d >= 0; --d) {
      digit[d] = code % radix[d];
      code /= radix[d];
    }
    SweepTrial tr;
    tr.trial = t;
    tr.learning_rate = space.learning_rate[digit[0]];
    tr.lambda = space.lambda[digit[1]];
    tr.alpha = space.alpha[digit[2]];
    tr.layers = space.layers[digit[3]];
    tr.eta = space.eta[digit[4]];
    tr.max_depth = space.max_depth[digit[5]];
    plan.push_back(tr);
  }
  return plan;
}

namespace {

const char* kLeaderboardHeader =
    "trial\tval_ndcg\tbest_epoch\tlearning_rate\tlambda\talpha\tlayers\teta\tmax_depth\n";

std::string leaderboard_line(const SweepTrial& t) {
  return std::to_string(t.trial) + '\t' + num(t.val_ndcg) + '\t' + std::to_string(t.best_epoch) +
         '\t' + num(t.learning_rate) + '\t' + num(t.lambda) + '\t' + num(t.alpha) + '\t' +
         std::to_string(t.layers) + '\t' + num(t.eta) + '\t' + std::to_string(t.max_depth) + '\n';
}

std::map<std::size_t, SweepTrial> read_leaderboard(const fs::path& path) {
  std::map<std::size_t, SweepTrial> done;
  if (!fs::exists(path)) return done;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (n == 1 || line.empty()) return;
    auto c = text::split(line);
    if (c.size() != 9) fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": bad row");
    auto u = [&](std::size_t i) {
      auto v = text::parse_uint(c[i]);
      if (!v) fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": bad row");
      return static_cast<std::size_t>(*v);
    };
    auto d = [&](std::size_t i) {
      auto v = text::parse_double(c[i]);
      if (!v) fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": bad row");
      return *v;
    };
    SweepTrial t{u(0), d(1), u(2), d(3), d(4), d(5), u(6), d(7), u(8)};
    done[t.trial] = t;
  });
  return done;
}

config::RunConfig trial_config(const config::RunConfig& cfg, const SweepTrial& t) {
  return with(cfg, {{"model.learning_rate", num(t.learning_rate)},
                    {"model.lambda", num(t.lambda)},
                    {"model.alpha", num(t.alpha)},
                    {"model.layers", std::to_string(t.layers)},
                    {"tree.eta", num(t.eta)},
                    {"tree.max_depth", std::to_string(t.max_depth)}});
}

std::string trial_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial-%03zu", t);
  return buf;
}

// Trees depend only on (eta, depth, tree seed); cached across trials.
fs::path ensure_trees(const config::RunConfig& cfg, const fs::path& run_dir, const fs::path& dir) {
  if (!fs::exists(dir / "coverage.json")) build_trees(cfg, run_dir, dir);
  return dir;
}

}  // namespace

SweepResult sweep(const config::RunConfig& cfg, const fs::path& run_dir, std::size_t trials) {
  const auto s = cfg.settings();
  load_split(run_dir);
  const auto plan = sweep_plan(s.sweep, trials == 0 ? s.sweep.trials : trials);
  require(!plan.empty(), "sweep: no trials to run");
  const fs::path dir = run_dir / "sweep";
  ensure_dir(dir);
  const fs::path board = dir / "leaderboard.tsv";
  auto done = read_leaderboard(board);
  if (!fs::exists(board)) text::write_file(board, kLeaderboardHeader);

  SweepResult res;
  res.trials_total = plan.size();
  for (const auto& planned : plan) {
    if (done.count(planned.trial)) continue;
    const auto tcfg = trial_config(cfg, planned);
    const auto trees = ensure_trees(
        tcfg, run_dir, dir / ("trees-eta-" + num(planned.eta) + "-depth-" + depth_label(planned.max_depth)));
    const fs::path tdir = dir / trial_name(planned.trial);
    auto st = train(tcfg, run_dir, {trees, tdir, /*resume=*/true});
    SweepTrial t = planned;
    t.val_ndcg = st.best_val_ndcg;
    t.best_epoch = st.best_epoch;
    text::append_file(board, leaderboard_line(t));
    done[t.trial] = t;
    ++res.trials_run;
    log::info("sweep " + trial_name(t.trial) + ": val ndcg " + num(t.val_ndcg));
  }

  for (const auto& planned : plan) res.leaderboard.push_back(done.at(planned.trial));
  res.best = res.leaderboard.front();
  for (const auto& t : res.leaderboard)
    if (t.val_ndcg > res.best.val_ndcg) res.best = t;

  const auto best_cfg = trial_config(cfg, res.best);
  write_json(dir / "best_config.json", best_cfg.document());
  res.best_report = evaluate(best_cfg, run_dir, dir / trial_name(res.best.trial) / "checkpoint",
                             dir / "best_report.json");
  return res;
}

std::vector<AblationRow> ablate(const config::RunConfig& cfg, const fs::path& run_dir,
                                const std::string& preset) {
  load_split(run_dir);
  const auto s = cfg.settings();
  const fs::path dir = run_dir / "ablation" / preset;
  ensure_dir(dir);

  struct Setting {
    std::string label;
    std::vector<config::RunConfig> runs;
  };
  std::vector<Setting> settings;
  if (preset == "alpha") {
    for (double a : kAlphaPreset) settings.push_back({"alpha=" + num(a), {with(cfg, {{"model.alpha", num(a)}})}});
  } else if (preset == "switches") {
    settings.push_back({"full", {cfg}});
    settings.push_back({"collaborative_off", {with(cfg, {{"model.alpha", "1"}})}});
    settings.push_back({"knowledge_off", {with(cfg, {{"model.alpha", "0"}})}});
  } else if (preset == "eta") {
    for (double e : kEtaPreset) settings.push_back({"eta=" + num(e), {with(cfg, {{"tree.eta", num(e)}})}});
  } else if (preset == "depth") {
    for (auto d : kDepthPreset) {
      Setting st{"max_depth=" + depth_label(d), {}};
      for (auto seed : s.tree_seeds)
        st.runs.push_back(with(cfg, {{"tree.max_depth", std::to_string(d)}, {"tree.seed", std::to_string(seed)}}));
      settings.push_back(std::move(st));
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown ablation preset '" + preset + "' (alpha, switches, eta, depth)");
  }

  std::vector<AblationRow> rows;
  std::string table = "setting\truns\tval_ndcg_mean\tval_ndcg_min\tval_ndcg_max\ttest_ndcg\ttest_hr\ttest_recall\n";
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const auto& setting = settings[si];
    AblationRow row;
    row.label = setting.label;
    row.val_ndcg_min = 1.0;
    for (std::size_t r = 0; r < setting.runs.size(); ++r) {
      const auto& rc = setting.runs[r];
      const fs::path sub = dir / ("setting-" + std::to_string(si) + "-run-" + std::to_string(r));
      const auto trees = ensure_trees(rc, run_dir, sub / "trees");
      auto st = train(rc, run_dir, {trees, sub / "train", /*resume=*/true});
      auto rep = evaluate(rc, run_dir, sub / "train" / "checkpoint", sub / "report.json");
      row.val_ndcg_mean += st.best_val_ndcg;
      row.val_ndcg_min = std::min(row.val_ndcg_min, st.best_val_ndcg);
      row.val_ndcg_max = std::max(row.val_ndcg_max, st.best_val_ndcg);
      row.test_ndcg += rep.test.ndcg;
      row.test_hr += rep.test.hr;
      row.test_recall += rep.test.recall;
      ++row.runs;
    }
    const double n = static_cast<double>(row.runs);
    row.val_ndcg_mean /= n;
    row.test_ndcg /= n;
    row.test_hr /= n;
    row.test_recall /= n;
    table += row.label + '\t' + std::to_string(row.runs) + '\t' + num(row.val_ndcg_mean) + '\t' +
             num(row.val_ndcg_min) + '\t' + num(row.val_ndcg_max) + '\t' + num(row.test_ndcg) +
             '\t' + num(row.test_hr) + '\t' + num(row.test_recall) + '\n';
    rows.push_back(row);
  }
  text::write_file(run_dir / "ablation" / (preset + ".tsv"), table);
  return rows;
}

EvalReport run_all(const config::RunConfig& cfg, const fs::path& run_dir) {
  preprocess(cfg, run_dir);
  build_trees(cfg, run_dir);
  train(cfg, run_dir);
  return evaluate(cfg, run_dir);
}

}  // namespace kguf::pipeline
