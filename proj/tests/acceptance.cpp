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
// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.
//
// Criteria 6 and 7 need the public datasets. Point KGUF_FACEBOOK_BOOKS_DIR or
// KGUF_YAHOO_MOVIES_DIR at a directory holding interactions.tsv, kg.tsv and
// linking.tsv to run them.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "log.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "support.hpp"
#include "textio.hpp"
#include "toy.hpp"
#include "treefilter.hpp"

namespace fs = std::filesystem;
using namespace kguf;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Verdict failed(std::string d) { return {Outcome::kFail, std::move(d)}; }
Verdict skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

oracle::Mat to_eigen(const Matrix& m) {
  oracle::Mat out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return out;
}

oracle::DenseModel dense_model(const data::InteractionDataset& ds, const model::ModelParams& p,
                               const graph::ItemKnowledge& k, const graph::PropagationConfig& c) {
  oracle::DenseModel m;
  m.R = oracle::Mat::Zero(static_cast<Eigen::Index>(ds.num_users()),
                          static_cast<Eigen::Index>(ds.num_items()));
  for (const auto& e : ds.train) m.R(e.user, e.item) = 1.0;
  m.Eu = to_eigen(p.users);
  m.Ei = to_eigen(p.items);
  m.Ef = to_eigen(p.features);
  m.item_rows.resize(ds.num_items());
  for (data::Index i = 0; i < ds.num_items(); ++i)
    for (auto r : k.rows_of(i)) m.item_rows[i].push_back(static_cast<int>(r));
  m.alpha = c.alpha;
  m.layers = static_cast<int>(c.layers);
  m.keep_weight = c.empty_policy == graph::EmptyFeaturePolicy::kKeepWeight;
  return m;
}

// Random F*_i given directly as feature lists (global feature ids).
std::vector<std::vector<kg::FeatureIndex>> random_item_features(Rng& rng, std::size_t items,
                                                                std::size_t features, double p) {
  std::vector<std::vector<kg::FeatureIndex>> out(items);
  for (auto& f : out)
    for (std::size_t j = 0; j < features; ++j)
      if (rng.uniform01() < p) f.push_back(static_cast<kg::FeatureIndex>(j));
  return out;
}

// 1. Analytic gradients of the full propagate -> combine -> score -> BPR + L2
// composite against central differences of the independent dense loss.
Verdict gradient_check() {
  Rng rng(101);
  constexpr int kInstances = 40;
  constexpr double kStep = 1e-6;
  double worst = 0.0, worst_loss_gap = 0.0;
  int checked = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t nu = 1 + rng.below(4), ni = 3 + rng.below(2);  // at most 8 nodes
    const std::size_t d = 1 + rng.below(4), L = rng.below(4);
    auto ds = testing::random_dataset(rng, nu, ni, 0.2);
    auto feats = random_item_features(rng, ni, 1 + rng.below(5), 0.5);
    auto knowledge = graph::ItemKnowledge::from_item_features(feats);
    model::TrainConfig cfg;
    cfg.alpha = rng.uniform01();
    cfg.layers = L;
    cfg.lambda = inst % 3 == 0 ? 0.0 : rng.uniform(1e-3, 0.1);
    cfg.empty_policy = inst % 2 ? graph::EmptyFeaturePolicy::kKeepWeight
                                : graph::EmptyFeaturePolicy::kCollaborativeOnly;
    auto params = model::init_params(nu, ni, knowledge.num_rows(), d, 1000 + inst);
    for (double& v : params.users.values()) v *= 3.0;  // move scores off zero
    for (double& v : params.items.values()) v *= 3.0;

    std::vector<model::TrainTriplet> batch;
    std::vector<oracle::Triplet> obatch;
    for (int attempt = 0; attempt < 100 && batch.size() < 6; ++attempt) {
      const auto& e = ds.train[rng.below(ds.train.size())];
      if (ds.train_lists.items(e.user).size() == ni) continue;
      data::Index neg;
      do neg = static_cast<data::Index>(rng.below(ni));
      while (ds.train_lists.contains(e.user, neg));
      batch.push_back({e.user, e.item, neg});
      obatch.push_back({static_cast<int>(e.user), static_cast<int>(e.item), static_cast<int>(neg)});
    }
    if (batch.empty()) continue;
    ++checked;
    const auto graph = graph::build_graph(ds);
    const auto analytic = model::loss_and_gradients(params, graph, knowledge, batch, cfg);
    auto dm = dense_model(ds, params, knowledge, cfg.propagation());
    const double oracle_loss = oracle::loss(dm, obatch, cfg.lambda);
    worst_loss_gap = std::max(worst_loss_gap, std::abs(oracle_loss - analytic.loss) /
                                                  std::max(1.0, std::abs(oracle_loss)));

    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    auto probe = [&](oracle::Mat& target, const Matrix& grad) {
      for (Eigen::Index r = 0; r < target.rows(); ++r)
        for (Eigen::Index c = 0; c < target.cols(); ++c) {
          const double saved = target(r, c);
          target(r, c) = saved + kStep;
          const double up = oracle::loss(dm, obatch, cfg.lambda);
          target(r, c) = saved - kStep;
          const double down = oracle::loss(dm, obatch, cfg.lambda);
          target(r, c) = saved;
          const double numeric = (up - down) / (2 * kStep);
          const double a = grad(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
          diff2 += (a - numeric) * (a - numeric);
          a2 += a * a;
          n2 += numeric * numeric;
        }
    };
    probe(dm.Eu, analytic.gradients.users);
    probe(dm.Ei, analytic.gradients.items);
    probe(dm.Ef, analytic.gradients.features);
    const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
    worst = std::max(worst, std::sqrt(diff2) / scale);
  }
  std::string d = std::to_string(checked) + " instances, worst relative error " + fmt(worst) +
                  ", worst loss gap " + fmt(worst_loss_gap);
  return checked >= 20 && worst < 1e-5 && worst_loss_gap < 1e-10 ? pass(d) : failed(d);
}

// 2. With alpha = 0 the propagation must equal plain dense LightGCN.
Verdict lightgcn_oracle() {
  Rng rng(202);
  constexpr int kInstances = 30;
  double worst = 0.0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t nu = 2 + rng.below(9), ni = 2 + rng.below(9);  // at most 20 nodes
    const std::size_t d = 1 + rng.below(6), L = rng.below(5);
    auto ds = testing::random_dataset(rng, nu, ni, 0.35);
    auto feats = random_item_features(rng, ni, 4, 0.5);
    auto knowledge = graph::ItemKnowledge::from_item_features(feats);
    auto params = model::init_params(nu, ni, knowledge.num_rows(), d, 5000 + inst);
    graph::PropagationConfig pc{0.0, L, graph::EmptyFeaturePolicy::kCollaborativeOnly};
    const auto graph = graph::build_graph(ds);
    const auto emb = model::final_embeddings(params, graph, knowledge, pc);

    // Textbook LightGCN on the dense normalized adjacency, no knowledge terms.
    const oracle::Mat Rm = [&] {
      oracle::Mat r = oracle::Mat::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(ni));
      for (const auto& e : ds.train) r(e.user, e.item) = 1.0;
      return r;
    }();
    const oracle::Mat A = oracle::normalized_adjacency(Rm);
    oracle::Mat U = to_eigen(params.users), I = to_eigen(params.items);
    oracle::Mat cu = U, ci = I;
    for (std::size_t l = 1; l <= L; ++l) {
      oracle::Mat nu_ = A * I, ni_ = A.transpose() * U;
      U = nu_;
      I = ni_;
      cu += U / (1.0 + static_cast<double>(l));
      ci += I / (1.0 + static_cast<double>(l));
    }
    const oracle::Mat ref = cu * ci.transpose();
    const oracle::Mat got = to_eigen(emb.users) * to_eigen(emb.items).transpose();
    worst = std::max(worst, (ref - got).cwiseAbs().maxCoeff());
  }
  std::string d = std::to_string(kInstances) + " instances, max |prediction diff| " + fmt(worst);
  return worst <= 1e-10 ? pass(d) : failed(d);
}

// 3. Every split is an IG maximizer under an exhaustive scan; F*_i within F_i.
Verdict tree_oracle() {
  Rng rng(303);
  constexpr int kInstances = 80;
  std::size_t nodes_checked = 0, problems = 0;
  std::string first_problem;
  auto problem = [&](const std::string& what) {
    if (problems++ == 0) first_problem = what;
  };
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t ni = 6 + rng.below(25), nf = 1 + rng.below(15), nu = 1 + rng.below(6);
    auto ds = testing::random_dataset(rng, nu, ni, 0.3);
    auto index = testing::random_features(rng, ni, nf, rng.uniform(0.15, 0.6));
    tree::TreeConfig tc;
    tc.eta = std::vector<double>{0.5, 1, 2, 5}[rng.below(4)];
    tc.max_depth = std::vector<std::size_t>{0, 0, 1, 2, 3}[rng.below(5)];
    tc.seed = 77 + inst;
    auto trees = tree::build_all_trees(ds, index, tc);
    for (const auto& t : trees) {
      std::set<data::Index> pos(t.positives.begin(), t.positives.end());
      auto labels_of = [&](const std::vector<data::Index>& items) {
        std::vector<int> l;
        for (auto i : items) l.push_back(pos.count(i) ? 1 : 0);
        return l;
      };
      auto has = [&](data::Index i, std::size_t f) {
        const auto& fi = index.features_of[i];
        return std::find(fi.begin(), fi.end(), f) != fi.end();
      };
      std::vector<data::Index> root = t.positives;
      root.insert(root.end(), t.negatives.begin(), t.negatives.end());
      std::sort(root.begin(), root.end());
      if (t.nodes.empty() || t.nodes[0].items != root) problem("root sample mismatch");
      if (tc.max_depth && t.depth() > tc.max_depth) problem("depth cap exceeded");
      for (const auto& node : t.nodes) {
        const auto labels = labels_of(node.items);
        double best = 0.0;
        for (std::size_t f = 0; f < index.num_features(); ++f) {
          std::vector<int> presence;
          for (auto i : node.items) presence.push_back(has(i, f) ? 1 : 0);
          best = std::max(best, oracle::information_gain(labels, presence));
        }
        if (!node.is_leaf()) {
          ++nodes_checked;
          std::vector<int> presence;
          for (auto i : node.items) presence.push_back(has(i, node.feature) ? 1 : 0);
          const double ig = oracle::information_gain(labels, presence);
          if (ig < best - 1e-12) problem("split below the exhaustive maximum");
          if (std::abs(ig - node.gain) > 1e-12) problem("reported gain differs from oracle");
          if (ig <= 1e-12) problem("split without positive gain");
          std::vector<data::Index> with, without;
          for (auto i : node.items) (has(i, node.feature) ? with : without).push_back(i);
          if (t.nodes[static_cast<std::size_t>(node.has_child)].items != with ||
              t.nodes[static_cast<std::size_t>(node.lacks_child)].items != without)
            problem("children do not partition the node sample");
        } else if (tc.max_depth == 0 && tc.min_samples_split <= 2) {
          const bool pure = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; });
          if (!pure && best > 1e-12) problem("impure leaf with a positive-gain candidate");
        }
      }
    }
    auto selected = tree::compute_selected_features(trees, index, ds.num_users());
    std::set<kg::FeatureIndex> U;
    for (const auto& t : trees)
      for (auto f : t.selected_features()) U.insert(f);
    for (data::Index i = 0; i < ni; ++i) {
      std::vector<kg::FeatureIndex> expect;
      for (auto f : index.features_of[i])
        if (U.count(f)) expect.push_back(f);
      const auto& got = selected.item_features[i];
      if (got != expect) problem("F*_i differs from F_i intersected with the union");
      if (!std::includes(index.features_of[i].begin(), index.features_of[i].end(), got.begin(), got.end()))
        problem("F*_i not contained in F_i");
    }
  }
  std::string d = std::to_string(kInstances) + " instances, " + std::to_string(nodes_checked) +
                  " internal nodes checked";
  if (problems) return failed(d + ", " + std::to_string(problems) + " problems, first: " + first_problem);
  return pass(d);
}

// 4. Metrics equal a brute-force recomputation; growth in k.
Verdict metric_oracle(std::string& note) {
  Rng rng(404);
  constexpr int kInstances = 30;
  std::size_t users_checked = 0, mismatches = 0, monotone_violations = 0, ndcg_dips_below = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const std::size_t nu = 1 + rng.below(100), ni = 5 + rng.below(40);
    auto ds = testing::random_dataset(rng, nu, ni, 0.15, 0.1, 0.15);
    const std::size_t d = 3;
    Matrix eu(nu, d), ei(ni, d);
    // Coarse values so that ties occur.
    for (double& v : eu.values()) v = static_cast<double>(rng.below(3));
    for (double& v : ei.values()) v = static_cast<double>(rng.below(3));
    const std::size_t k = 1 + rng.below(12);
    for (bool strict : {false, true}) {
      for (auto split : {data::Split::kVal, data::Split::kTest}) {
        auto res = eval::evaluate(eu, ei, ds, split, {k, strict});
        const auto& rel_lists = ds.lists(split);
        const auto& other = ds.lists(split == data::Split::kVal ? data::Split::kTest : data::Split::kVal);
        double sn = 0, sh = 0, sr = 0;
        std::size_t counted = 0;
        std::size_t pos = 0;
        for (data::Index u = 0; u < nu; ++u) {
          auto rel = rel_lists.items(u);
          if (rel.empty()) continue;
          std::vector<double> scores(ni);
          for (data::Index i = 0; i < ni; ++i) {
            double s = 0;
            for (std::size_t c = 0; c < d; ++c) s += eu(u, c) * ei(i, c);
            scores[i] = s;
          }
          std::set<int> masked(ds.train_lists.items(u).begin(), ds.train_lists.items(u).end());
          if (strict)
            for (auto i : other.items(u)) masked.insert(static_cast<int>(i));
          std::set<int> relevant(rel.begin(), rel.end());
          auto ref = oracle::brute_force_metrics(scores, masked, relevant, static_cast<int>(k));
          ++users_checked;
          if (pos >= res.users.size() || res.users[pos].user != u) {
            ++mismatches;
            continue;
          }
          const auto& got = res.users[pos++];
          if (got.ndcg != ref.ndcg || got.hr != ref.hr || got.recall != ref.recall) ++mismatches;
          sn += ref.ndcg;
          sh += ref.hr;
          sr += ref.recall;
          ++counted;

          // Growth in k for this user.
          double prev_hr = 0, prev_rec = 0, prev_dcg = 0, prev_ndcg = 0;
          for (int kk = 1; kk <= static_cast<int>(ni); ++kk) {
            auto m = oracle::brute_force_metrics(scores, masked, relevant, kk);
            double idcg = 0;
            for (int p = 1; p <= std::min<int>(kk, static_cast<int>(relevant.size())); ++p)
              idcg += 1.0 / std::log2(p + 1.0);
            const double dcg = m.ndcg * idcg;
            if (m.hr < prev_hr || m.recall < prev_rec || dcg < prev_dcg - 1e-12) ++monotone_violations;
            if (kk > static_cast<int>(relevant.size()) && m.ndcg < prev_ndcg - 1e-12) ++monotone_violations;
            if (kk <= static_cast<int>(relevant.size()) && m.ndcg < prev_ndcg - 1e-12) ++ndcg_dips_below;
            prev_hr = m.hr;
            prev_rec = m.recall;
            prev_dcg = dcg;
            prev_ndcg = m.ndcg;
          }
        }
        if (counted) {
          const double n = static_cast<double>(counted);
          if (res.ndcg != sn / n || res.hr != sh / n || res.recall != sr / n) ++mismatches;
        }
      }
    }
  }
  note = "nDCG with IDCG over min(k, |relevant|) positions fell when k grew inside k <= |relevant| for " +
         std::to_string(ndcg_dips_below) +
         " user/k pairs; growth is asserted for HR, Recall, DCG at every k and for nDCG once k >= |relevant|";
  std::string d = std::to_string(users_checked) + " user rankings compared exactly, " +
                  std::to_string(mismatches) + " mismatches, " + std::to_string(monotone_violations) +
                  " growth violations";
  return mismatches == 0 && monotone_violations == 0 ? pass(d) : failed(d);
}

fs::path source_dir() { return fs::path(KGUF_SOURCE_DIR); }

config::RunConfig toy_config() {
  auto cfg = config::RunConfig::load(source_dir() / "configs" / "toy.json");
  return cfg;
}

// 5. End-to-end on the bundled toy data with alpha = 0.4.
Verdict toy_convergence(std::string& note) {
  const auto started = std::chrono::steady_clock::now();
  testing::TempDir regen("toy-regen");
  toy::generate(regen.path());
  for (const char* f : {"interactions.tsv", "kg.tsv", "linking.tsv"})
    if (text::read_file(regen / f) != text::read_file(source_dir() / "data" / "toy" / f))
      return failed(std::string("bundled toy file differs from the generator output: ") + f);

  auto cfg = toy_config();
  cfg.set("model.alpha", "0.4");
  testing::TempDir run("toy-run");
  pipeline::preprocess(cfg, run.path());
  pipeline::build_trees(cfg, run.path());
  auto st = pipeline::train(cfg, run.path());
  auto rep = pipeline::evaluate(cfg, run.path());

  auto literal = cfg;
  literal.set("eval.strict", "false");
  auto lit = pipeline::evaluate(literal, run.path(), {}, run / "literal.json");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  note = "validation nDCG@10 with only train items masked: " + fmt4(lit.val.ndcg) +
         " (held-out val and test items of a user are interchangeable there)";
  std::string d = "validation nDCG@10 " + fmt4(rep.val.ndcg) + " (fresh init " +
                  fmt4(st.initial_val_ndcg) + "), test nDCG@10 " + fmt4(rep.test.ndcg) + ", " +
                  fmt(secs) + " s";
  const bool ok = rep.val.ndcg >= 0.9 && rep.val.ndcg > st.initial_val_ndcg &&
                  rep.val.ndcg == st.best_val_ndcg && secs < 300;
  return ok ? pass(d) : failed(d);
}

bool dataset_dir(const char* env, fs::path& dir) {
  const char* v = std::getenv(env);
  if (!v || !*v) return false;
  dir = v;
  return fs::exists(dir / "interactions.tsv") && fs::exists(dir / "kg.tsv") &&
         fs::exists(dir / "linking.tsv");
}

config::RunConfig dataset_config(const std::string& preset, const fs::path& dir) {
  auto cfg = config::RunConfig::preset(preset);
  cfg.set("paths.interactions", (dir / "interactions.tsv").string());
  cfg.set("paths.kg", (dir / "kg.tsv").string());
  cfg.set("paths.linking", (dir / "linking.tsv").string());
  return cfg;
}

// 6. Facebook Books reproduction, if the data is available.
Verdict facebook_books() {
  fs::path dir;
  if (!dataset_dir("KGUF_FACEBOOK_BOOKS_DIR", dir))
    return skip("dataset not available (set KGUF_FACEBOOK_BOOKS_DIR)");
  auto cfg = dataset_config("facebook_books", dir);
  testing::TempDir run("fb");
  pipeline::preprocess(cfg, run.path());
  auto res = pipeline::sweep(cfg, run.path(), 20);
  const auto& t = res.best_report.test;
  std::string d = "test nDCG@10 " + fmt4(t.ndcg) + " HR@10 " + fmt4(t.hr) + " Recall@10 " +
                  fmt4(t.recall) + " (targets 0.1156 / 0.3594 / 0.1697)";
  const bool ok = std::abs(t.ndcg - 0.1156) <= 0.015 && std::abs(t.hr - 0.3594) <= 0.03 &&
                  std::abs(t.recall - 0.1697) <= 0.03;
  return ok ? pass(d) : failed(d);
}

// 7. Switch ablation ordering on Yahoo! Movies, if the data is available.
Verdict yahoo_ablation() {
  fs::path dir;
  if (!dataset_dir("KGUF_YAHOO_MOVIES_DIR", dir))
    return skip("dataset not available (set KGUF_YAHOO_MOVIES_DIR)");
  auto cfg = dataset_config("yahoo_movies", dir);
  testing::TempDir run("yahoo");
  pipeline::preprocess(cfg, run.path());
  auto rows = pipeline::ablate(cfg, run.path(), "switches");
  std::map<std::string, double> v;
  for (const auto& r : rows) v[r.label] = r.val_ndcg_mean;
  std::string d = "full " + fmt4(v["full"]) + ", collaborative off " + fmt4(v["collaborative_off"]) +
                  ", knowledge off " + fmt4(v["knowledge_off"]);
  const bool ok = v["full"] > v["collaborative_off"] && v["collaborative_off"] > v["knowledge_off"];
  return ok ? pass(d) : failed(d);
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = text::read_file(e.path());
  return out;
}

// 8. Two identical training runs produce identical logs and checkpoints.
Verdict determinism() {
  auto cfg = toy_config();
  testing::TempDir run("det");
  pipeline::preprocess(cfg, run.path());
  pipeline::build_trees(cfg, run.path());
  auto a = pipeline::train(cfg, run.path(), {{}, run / "a", false});
  auto b = pipeline::train(cfg, run.path(), {{}, run / "b", false});
  const auto ca = tree_contents(run / "a" / "checkpoint");
  const auto cb = tree_contents(run / "b" / "checkpoint");
  const bool logs = text::read_file(run / "a" / "train_log.tsv") == text::read_file(run / "b" / "train_log.tsv");
  const bool ckpt = ca == cb && !ca.empty();
  std::string d = std::to_string(a.epochs) + " epochs each, " + std::to_string(ca.size()) +
                  " checkpoint files, logs " + (logs ? "identical" : "differ") + ", checkpoints " +
                  (ckpt ? "identical" : "differ");
  return logs && ckpt && a.epochs == b.epochs ? pass(d) : failed(d);
}

}  // namespace

int main(int argc, char** argv) {
  log::set_verbosity(0);
  // Optional copy of the verdict lines, printed by ctest after the run.
  std::FILE* copy = argc > 1 ? std::fopen(argv[1], "w") : nullptr;
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict(std::string&)> run;
  };
  std::vector<Criterion> criteria = {
      {1, "gradient check", [](std::string&) { return gradient_check(); }},
      {2, "LightGCN oracle", [](std::string&) { return lightgcn_oracle(); }},
      {3, "tree oracle", [](std::string&) { return tree_oracle(); }},
      {4, "metric oracle", metric_oracle},
      {5, "toy convergence", toy_convergence},
      {6, "Facebook Books reproduction", [](std::string&) { return facebook_books(); }},
      {7, "Yahoo! Movies ablation order", [](std::string&) { return yahoo_ablation(); }},
      {8, "determinism", [](std::string&) { return determinism(); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::string note;
    Verdict v;
    try {
      v = c.run(note);
    } catch (const std::exception& e) {
      v = failed(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    for (std::FILE* out : {stdout, copy}) {
      if (!out) continue;
      std::fprintf(out, "%s criterion %d (%s): %s\n", tag, c.id, c.name, v.detail.c_str());
      if (!note.empty()) std::fprintf(out, "     note: %s\n", note.c_str());
      std::fflush(out);
    }
    failures += v.outcome == Outcome::kFail ? 1 : 0;
  }
  if (copy) std::fclose(copy);
  return failures == 0 ? 0 : 1;
}
