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
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"

#include "eval.hpp"
#include "model.hpp"
#include "support.hpp"
#include "textio.hpp"

using namespace kguf;

namespace {

double squared_norm(const model::ModelParams& p) {
  double s = 0;
  for (const auto* m : {&p.users, &p.items, &p.features})
    for (double v : m->values()) s += v * v;
  return s;
}

struct Fixture {
  data::InteractionDataset ds;
  graph::PropagationGraph graph;
  graph::ItemKnowledge knowledge;

  explicit Fixture(std::uint64_t seed, std::size_t users = 12, std::size_t items = 15) {
    Rng rng(seed);
    ds = testing::random_dataset(rng, users, items, 0.25, 0.1, 0.1);
    graph = graph::build_graph(ds);
    std::vector<std::vector<kg::FeatureIndex>> f(items);
    for (std::size_t i = 0; i < items; ++i)
      for (kg::FeatureIndex k = 0; k < 5; ++k)
        if (rng.uniform01() < 0.4) f[i].push_back(k);
    knowledge = graph::ItemKnowledge::from_item_features(f);
  }
};

}  // namespace

TEST_CASE("init_params") {
  auto p = model::init_params(300, 200, 100, 64, 42);
  CHECK(p.users.cols() == 64);
  CHECK(p.items.cols() == 64);
  CHECK(p.features.cols() == 64);
  CHECK(p.features.rows() == 100);
  auto q = model::init_params(300, 200, 100, 64, 42);
  CHECK(p.users.values()[17] == q.users.values()[17]);
  CHECK(std::equal(p.items.values().begin(), p.items.values().end(), q.items.values().begin()));
  // Glorot uniform variance 2 / (rows + d).
  for (const auto* m : {&p.users, &p.items, &p.features}) {
    double var = 0;
    for (double v : m->values()) var += v * v;
    var /= static_cast<double>(m->values().size());
    const double expect = 2.0 / static_cast<double>(m->rows() + m->cols());
    CHECK(std::abs(var / expect - 1.0) < 0.2);
  }
}

TEST_CASE("predict") {
  double a[] = {1, 2}, b[] = {3, 4}, x[] = {1, 0}, y[] = {0, 1};
  CHECK(model::predict(a, b) == 11.0);
  CHECK(model::predict(x, y) == 0.0);
  CHECK(model::predict(x, x) == 1.0);
}

TEST_CASE("sample_bpr_batch") {
  auto two = testing::make_dataset(2, 2, {{0, 0}, {1, 0}, {1, 1}});
  Rng rng(1);
  CHECK(model::sample_bpr_batch(two, 0, rng).empty());
  auto b = model::sample_bpr_batch(two, 50, rng);
  REQUIRE(b.size() == 50);
  for (const auto& t : b) {
    // User 1 has the whole catalog and is never drawn.
    CHECK(t.user == 0);
    CHECK(t.positive == 0);
    CHECK(t.negative == 1);
  }

  SUBCASE("negatives are uniform over non-train items") {
    std::vector<data::Interaction> train = {{0, 0}, {0, 1}};
    for (data::Index i = 0; i < 12; ++i) train.push_back({1, i});
    auto ds = testing::make_dataset(2, 12, train);
    std::map<data::Index, int> counts;
    int n = 0;
    for (int r = 0; r < 200; ++r)
      for (const auto& t : model::sample_bpr_batch(ds, 100, rng)) {
        CHECK(!ds.train_lists.contains(t.user, t.negative));
        CHECK(ds.train_lists.contains(t.user, t.positive));
        if (t.user == 0) {
          counts[t.negative]++;
          ++n;
        }
      }
    REQUIRE(counts.size() == 10);
    const double expect = n / 10.0;
    double chi2 = 0;
    for (auto [item, c] : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 27.88);  // 9 dof, p = 0.001
  }
}

TEST_CASE("loss values") {
  CHECK(model::neg_log_sigmoid(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(model::neg_log_sigmoid(-800.0)));
  CHECK(model::neg_log_sigmoid(-800.0) == doctest::Approx(800.0));
  CHECK(model::neg_log_sigmoid(800.0) == 0.0);

  Fixture fx(2);
  auto p = model::init_params(fx.ds.num_users(), fx.ds.num_items(), fx.knowledge.num_rows(), 4, 1);
  for (auto* m : {&p.users, &p.items, &p.features}) std::fill(m->values().begin(), m->values().end(), 0.0);
  Rng rng(3);
  auto batch = model::sample_bpr_batch(fx.ds, 7, rng);
  model::TrainConfig cfg;
  cfg.lambda = 0.0;
  auto lg = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg);
  CHECK(lg.loss == doctest::Approx(7 * std::log(2.0)));
  for (double v : lg.gradients.features.values()) CHECK(v == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Fixture fx(100 + seed, 5, 6);
    model::TrainConfig cfg;
    cfg.alpha = 0.1 * static_cast<double>(seed);
    cfg.layers = seed % 4;
    cfg.lambda = 0.01;
    auto p = model::init_params(5, 6, fx.knowledge.num_rows(), 3, seed);
    Rng rng(seed);
    auto batch = model::sample_bpr_batch(fx.ds, 5, rng);
    auto lg = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg);
    const double h = 1e-6;
    double diff = 0, norm = 0;
    auto probe = [&](Matrix& m, const Matrix& g) {
      for (std::size_t k = 0; k < m.values().size(); ++k) {
        const double saved = m.values()[k];
        m.values()[k] = saved + h;
        const double up = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg).loss;
        m.values()[k] = saved - h;
        const double down = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg).loss;
        m.values()[k] = saved;
        const double fd = (up - down) / (2 * h);
        diff += (fd - g.values()[k]) * (fd - g.values()[k]);
        norm += g.values()[k] * g.values()[k];
      }
    };
    probe(p.users, lg.gradients.users);
    probe(p.items, lg.gradients.items);
    probe(p.features, lg.gradients.features);
    CHECK(std::sqrt(diff / std::max(norm, 1e-16)) < 1e-5);
  }
}

TEST_CASE("full-batch gradient descent lowers the loss") {
  Fixture fx(5);
  model::TrainConfig cfg;
  cfg.lambda = 1e-3;
  cfg.layers = 2;
  auto p = model::init_params(fx.ds.num_users(), fx.ds.num_items(), fx.knowledge.num_rows(), 8, 9);
  Rng rng(4);
  auto batch = model::sample_bpr_batch(fx.ds, 40, rng);
  model::Optimizer sgd(model::OptimizerKind::kSgd, 1e-3, p);
  double prev = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg).loss;
  for (int step = 0; step < 10; ++step) {
    auto lg = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg);
    sgd.step(p, lg.gradients);
    const double now = model::loss_and_gradients(p, fx.graph, fx.knowledge, batch, cfg).loss;
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("an empty batch only shrinks the parameters") {
  Fixture fx(6);
  model::TrainConfig cfg;
  cfg.lambda = 0.1;
  auto p = model::init_params(fx.ds.num_users(), fx.ds.num_items(), fx.knowledge.num_rows(), 4, 2);
  auto lg = model::loss_and_gradients(p, fx.graph, fx.knowledge, {}, cfg);
  CHECK(lg.bpr == 0.0);
  const double before = squared_norm(p);
  model::Optimizer sgd(model::OptimizerKind::kSgd, 0.01, p);
  sgd.step(p, lg.gradients);
  CHECK(squared_norm(p) < before);
}

TEST_CASE("training stops") {
  Fixture fx(7, 20, 25);
  model::TrainingContext ctx{fx.ds, fx.graph, fx.knowledge, {}};
  ctx.config.batch_size = 16;
  ctx.config.max_epochs = 1;
  CHECK(model::fit(ctx, 8).log.size() == 1);

  ctx.config.max_epochs = 100;
  ctx.config.patience = 0;
  ctx.config.learning_rate = 0.05;
  auto r = model::fit(ctx, 8);
  REQUIRE(!r.log.empty());
  double best = r.initial_score;
  for (std::size_t e = 0; e + 1 < r.log.size(); ++e) {
    CHECK(r.log[e].val_ndcg > best);
    best = r.log[e].val_ndcg;
  }
  if (r.log.size() < 100) CHECK(r.log.back().val_ndcg <= best);
}

TEST_CASE("resume from a checkpoint is bit-exact") {
  Fixture fx(8, 20, 25);
  model::TrainingContext ctx{fx.ds, fx.graph, fx.knowledge, {}};
  ctx.config.batch_size = 8;
  ctx.config.max_epochs = 6;
  ctx.config.patience = 100;
  ctx.config.learning_rate = 0.01;
  auto straight = model::start_training(ctx, 4);
  model::continue_training(straight, ctx);

  model::EmbeddingIds ids{fx.ds.users.ids(), fx.ds.items.ids(), {}};
  for (std::size_t r = 0; r < fx.knowledge.num_rows(); ++r) ids.features.push_back(std::to_string(r));
  testing::TempDir dir("resume");
  struct Interrupt {};
  auto broken = model::start_training(ctx, 4);
  try {
    model::continue_training(broken, ctx, [&](const model::TrainState& s) {
      model::save_checkpoint(dir.path(), s, ids);
      if (s.epoch == 3) throw Interrupt{};
    });
  } catch (const Interrupt&) {
  }
  auto resumed = model::load_checkpoint(dir.path(), ctx.config);
  CHECK(resumed.epoch == 3);
  model::continue_training(resumed, ctx);
  CHECK(model::format_training_log(resumed.log) == model::format_training_log(straight.log));
  for (auto [a, b] : {std::pair{&resumed.params.users, &straight.params.users},
                      std::pair{&resumed.params.items, &straight.params.items},
                      std::pair{&resumed.best.features, &straight.best.features}})
    CHECK(std::equal(a->values().begin(), a->values().end(), b->values().begin(), b->values().end()));
}

TEST_CASE("embedding export round-trips") {
  Fixture fx(9);
  auto p = model::init_params(fx.ds.num_users(), fx.ds.num_items(), 0, 64, 5);
  graph::PropagationConfig pc;
  auto e = model::final_embeddings(p, fx.graph, graph::ItemKnowledge::from_item_features(
                                                    std::vector<std::vector<kg::FeatureIndex>>(fx.ds.num_items())),
                                   pc);
  testing::TempDir dir("export");
  model::export_embeddings(dir.path(), p, e, {fx.ds.users.ids(), fx.ds.items.ids(), {}});
  auto [uids, users] = model::read_matrix(dir / "users.tsv");
  CHECK(uids == fx.ds.users.ids());
  CHECK(std::equal(users.values().begin(), users.values().end(), e.users.values().begin()));
  auto lines = text::split(text::read_file(dir / "items.tsv").substr(0, 4096), '\n');
  CHECK(text::split(lines[1]).size() == 65);
  CHECK(text::read_file(dir / "features.tsv").find('\n') == text::read_file(dir / "features.tsv").size() - 1);
}

TEST_CASE("ranking ignores a common positive scale") {
  Fixture fx(10, 30, 40);
  auto p = model::init_params(30, 40, 0, 6, 3);
  auto scaled = p;
  for (auto* m : {&scaled.users, &scaled.items})
    for (double& v : m->values()) v *= 3.7;
  auto a = eval::evaluate(p.users, p.items, fx.ds, data::Split::kTest, {10, false});
  auto b = eval::evaluate(scaled.users, scaled.items, fx.ds, data::Split::kTest, {10, false});
  REQUIRE(a.users.size() == b.users.size());
  for (std::size_t k = 0; k < a.users.size(); ++k) CHECK(a.users[k].ranked.items == b.users[k].ranked.items);
}
