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
#include "model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "log.hpp"
#include "textio.hpp"

namespace kguf::model {

void TrainConfig::validate() const {
  propagation().validate();
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be > 0");
  require(batch_size >= 1, "batch size must be >= 1");
  require(eval_k >= 1, "eval k must be >= 1");
}

ModelParams init_params(std::size_t num_users, std::size_t num_items, std::size_t num_features,
                        std::size_t dim, std::uint64_t seed) {
  require(num_users > 0 && num_items > 0 && dim > 0, "init_params: dimensions must be positive");
  auto draw = [&](std::size_t rows, std::uint64_t stream) {
    Matrix m(rows, dim);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + dim));
    Rng rng(mix_seed(seed, stream));
    for (double& v : m.values()) v = rng.uniform(-bound, bound);
    return m;
  };
  return {draw(num_users, 0), draw(num_items, 1), draw(num_features, 2)};
}

std::vector<TrainTriplet> sample_bpr_batch(const data::InteractionDataset& dataset,
                                           std::size_t batch_size, Rng& rng) {
  std::vector<TrainTriplet> batch;
  if (batch_size == 0) return batch;
  require(!dataset.train.empty(), "sample_bpr_batch: empty train split");
  const std::size_t ni = dataset.num_items();
  batch.reserve(batch_size);
  std::size_t full_catalog_draws = 0;
  while (batch.size() < batch_size) {
    const auto& pair = dataset.train[rng.below(dataset.train.size())];
    if (dataset.train_lists.items(pair.user).size() >= ni) {
      // Nothing to contrast against; draw another interaction.
      if (++full_catalog_draws > 1000 * batch_size)
        fail(ErrorCode::kInvalidArgument, "every sampled user has interacted with every item");
      continue;
    }
    data::Index neg;
    do {
      neg = static_cast<data::Index>(rng.below(ni));
    } while (dataset.train_lists.contains(pair.user, neg));
    batch.push_back({pair.user, pair.item, neg});
  }
  return batch;
}

double neg_log_sigmoid(double x) {
  // softplus(-x) = max(-x, 0) + log1p(exp(-|x|))
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

namespace {

// sigmoid(-x), the magnitude of d/dx of -ln sigmoid(x).
double sigmoid_neg(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

graph::Embeddings final_embeddings(const ModelParams& params, const graph::PropagationGraph& graph,
                                   const graph::ItemKnowledge& knowledge,
                                   const graph::PropagationConfig& config) {
  auto stack = graph::propagate(params.users, params.items, params.features, graph, knowledge,
                                config);
  return graph::combine_layers(stack);
}

LossAndGradients loss_and_gradients(const ModelParams& params,
                                    const graph::PropagationGraph& graph,
                                    const graph::ItemKnowledge& knowledge,
                                    std::span<const TrainTriplet> batch, const TrainConfig& config) {
  const std::size_t d = params.dim();
  const auto prop = config.propagation();
  auto emb = final_embeddings(params, graph, knowledge, prop);

  Matrix grad_users(emb.users.rows(), d), grad_items(emb.items.rows(), d);
  LossAndGradients out;
  for (const auto& t : batch) {
    auto eu = emb.users.row(t.user);
    auto ep = emb.items.row(t.positive);
    auto en = emb.items.row(t.negative);
    const double x = predict(eu, ep) - predict(eu, en);
    out.bpr += neg_log_sigmoid(x);
    const double g = -sigmoid_neg(x);  // dLoss/dx
    auto gu = grad_users.row(t.user);
    auto gp = grad_items.row(t.positive);
    auto gn = grad_items.row(t.negative);
    for (std::size_t k = 0; k < d; ++k) {
      gu[k] += g * (ep[k] - en[k]);
      gp[k] += g * eu[k];
      gn[k] -= g * eu[k];
    }
  }

  auto pg = graph::backpropagate(grad_users, grad_items, params.features.rows(), graph, knowledge,
                                 prop);
  out.gradients = {std::move(pg.users), std::move(pg.items), std::move(pg.features)};

  const double lambda = config.lambda;
  if (lambda > 0.0) {
    auto regularize_rows = [&](const Matrix& p, Matrix& g, const auto& rows) {
      for (std::size_t r : rows) {
        auto pr = p.row(r);
        auto gr = g.row(r);
        for (std::size_t k = 0; k < d; ++k) {
          out.reg += lambda * pr[k] * pr[k];
          gr[k] += 2.0 * lambda * pr[k];
        }
      }
    };
    if (config.reg_mode == RegMode::kFull) {
      auto all = [](const Matrix& m) {
        std::vector<std::size_t> r(m.rows());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
        return r;
      };
      regularize_rows(params.users, out.gradients.users, all(params.users));
      regularize_rows(params.items, out.gradients.items, all(params.items));
      regularize_rows(params.features, out.gradients.features, all(params.features));
    } else {
      std::set<std::size_t> users, items, features;
      for (const auto& t : batch) {
        users.insert(t.user);
        items.insert(t.positive);
        items.insert(t.negative);
      }
      for (std::size_t i : items)
        for (auto r : knowledge.rows_of(static_cast<data::Index>(i))) features.insert(r);
      regularize_rows(params.users, out.gradients.users, users);
      regularize_rows(params.items, out.gradients.items, items);
      regularize_rows(params.features, out.gradients.features, features);
    }
  }
  out.loss = out.bpr + out.reg;
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const ModelParams& shape_like)
    : kind_(kind), learning_rate_(learning_rate) {
  if (kind_ == OptimizerKind::kAdam) {
    auto zeros = [](const Matrix& m) { return Matrix(m.rows(), m.cols()); };
    first_moment = {zeros(shape_like.users), zeros(shape_like.items), zeros(shape_like.features)};
    second_moment = first_moment;
  }
}

void Optimizer::step(ModelParams& params, const ModelParams& gradients) {
  ++steps_;
  Matrix* p[3] = {&params.users, &params.items, &params.features};
  const Matrix* g[3] = {&gradients.users, &gradients.items, &gradients.features};
  if (kind_ == OptimizerKind::kSgd) {
    for (int k = 0; k < 3; ++k) axpy(-learning_rate_, g[k]->values(), p[k]->values());
    return;
  }
  Matrix* m[3] = {&first_moment.users, &first_moment.items, &first_moment.features};
  Matrix* v[3] = {&second_moment.users, &second_moment.items, &second_moment.features};
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  for (int k = 0; k < 3; ++k) {
    auto pv = p[k]->values();
    auto gv = g[k]->values();
    auto mv = m[k]->values();
    auto vv = v[k]->values();
    for (std::size_t j = 0; j < pv.size(); ++j) {
      mv[j] = kBeta1 * mv[j] + (1.0 - kBeta1) * gv[j];
      vv[j] = kBeta2 * vv[j] + (1.0 - kBeta2) * gv[j] * gv[j];
      pv[j] -= learning_rate_ * (mv[j] / c1) / (std::sqrt(vv[j] / c2) + kEpsilon);
    }
  }
}

double validation_ndcg(const ModelParams& params, const TrainingContext& ctx) {
  auto emb = final_embeddings(params, ctx.graph, ctx.knowledge, ctx.config.propagation());
  eval::EvalOptions opts{ctx.config.eval_k, ctx.config.strict_eval};
  return eval::evaluate(emb.users, emb.items, ctx.dataset, data::Split::kVal, opts).ndcg;
}

TrainState start_training(const TrainingContext& ctx, std::size_t dim) {
  ctx.config.validate();
  TrainState s;
  s.params = init_params(ctx.dataset.num_users(), ctx.dataset.num_items(),
                         ctx.knowledge.num_rows(), dim, ctx.config.seed);
  s.best = s.params;
  s.optimizer = Optimizer(ctx.config.optimizer, ctx.config.learning_rate, s.params);
  s.rng = Rng(mix_seed(ctx.config.seed, 1000));
  s.initial_score = validation_ndcg(s.params, ctx);
  s.best_score = s.initial_score;
  s.finished = ctx.config.max_epochs == 0;
  return s;
}

void continue_training(TrainState& state, const TrainingContext& ctx,
                       const std::function<void(const TrainState&)>& on_epoch) {
  const auto& cfg = ctx.config;
  const std::size_t n_train = ctx.dataset.train.size();
  const std::size_t batches = (n_train + cfg.batch_size - 1) / cfg.batch_size;
  while (!state.finished && state.epoch < cfg.max_epochs) {
    const auto started = std::chrono::steady_clock::now();
    const std::size_t epoch = state.epoch + 1;
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      auto batch = sample_bpr_batch(ctx.dataset, cfg.batch_size, state.rng);
      auto lg = loss_and_gradients(state.params, ctx.graph, ctx.knowledge, batch, cfg);
      if (!std::isfinite(lg.loss)) {
        fail(ErrorCode::kNumeric, "non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(b + 1) + " (bpr " +
                                      text::format_double(lg.bpr) + ", reg " +
                                      text::format_double(lg.reg) + ")");
      }
      epoch_loss += lg.loss;
      state.optimizer.step(state.params, lg.gradients);
    }
    const double score = validation_ndcg(state.params, ctx);
    state.epoch = epoch;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    state.log.push_back({epoch, epoch_loss, score, seconds});
    if (score > state.best_score) {
      state.best_score = score;
      state.best_epoch = epoch;
      state.best = state.params;
      state.bad_epochs = 0;
    } else if (++state.bad_epochs >= cfg.patience) {
      state.finished = true;
    }
    if (state.epoch >= cfg.max_epochs) state.finished = true;
    log::info("epoch " + std::to_string(epoch) + " loss " + text::format_double(epoch_loss) +
              " val_ndcg@" + std::to_string(cfg.eval_k) + " " + text::format_double(score));
    if (on_epoch) on_epoch(state);
  }
  state.finished = true;
}

FitResult fit(const TrainingContext& ctx, std::size_t dim) {
  auto state = start_training(ctx, dim);
  continue_training(state, ctx);
  return {std::move(state.best), std::move(state.log), state.best_score, state.initial_score,
          state.best_epoch};
}

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                  const Matrix& m) {
  require(ids.size() == m.rows(), "write_matrix: id count does not match rows");
  std::string out = "id";
  for (std::size_t c = 0; c < m.cols(); ++c) out += "\td" + std::to_string(c);
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += ids[r];
    for (double v : m.row(r)) {
      out += '\t';
      out += text::format_double(v);
    }
    out += '\n';
  }
  text::write_file(path, out);
}

std::pair<std::vector<std::string>, Matrix> read_matrix(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t cols = 0;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    auto parts = text::split(line);
    if (n == 1) {
      if (parts.empty() || parts[0] != "id") fail(ErrorCode::kParse, path.string() + ": bad header");
      cols = parts.size() - 1;
      return;
    }
    if (line.empty()) return;
    if (parts.size() != cols + 1)
      fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": wrong column count");
    ids.emplace_back(parts[0]);
    for (std::size_t c = 1; c < parts.size(); ++c) {
      auto v = text::parse_double(parts[c]);
      if (!v) fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": bad number");
      values.push_back(*v);
    }
  });
  Matrix m(ids.size(), cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return {std::move(ids), std::move(m)};
}

void export_embeddings(const std::filesystem::path& dir, const ModelParams& params,
                       const graph::Embeddings& combined, const EmbeddingIds& ids) {
  write_matrix(dir / "users.tsv", ids.users, combined.users);
  write_matrix(dir / "items.tsv", ids.items, combined.items);
  write_matrix(dir / "features.tsv", ids.features, params.features);
}

namespace {

void write_params(const std::filesystem::path& dir, const std::string& prefix,
                  const ModelParams& p, const EmbeddingIds& ids) {
  write_matrix(dir / (prefix + "users.tsv"), ids.users, p.users);
  write_matrix(dir / (prefix + "items.tsv"), ids.items, p.items);
  write_matrix(dir / (prefix + "features.tsv"), ids.features, p.features);
}

ModelParams read_params(const std::filesystem::path& dir, const std::string& prefix) {
  ModelParams p;
  p.users = read_matrix(dir / (prefix + "users.tsv")).second;
  p.items = read_matrix(dir / (prefix + "items.tsv")).second;
  p.features = read_matrix(dir / (prefix + "features.tsv")).second;
  return p;
}

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const EmbeddingIds& ids) {
  write_params(dir, "params_", state.best, ids);
  const auto sdir = dir / "state";
  write_params(sdir, "current_", state.params, ids);
  if (state.optimizer.kind() == OptimizerKind::kAdam) {
    write_params(sdir, "adam_m_", state.optimizer.first_moment, ids);
    write_params(sdir, "adam_v_", state.optimizer.second_moment, ids);
  }
  nlohmann::json j;
  j["epoch"] = state.epoch;
  j["best_epoch"] = state.best_epoch;
  j["best_score"] = text::format_double(state.best_score);
  j["initial_score"] = text::format_double(state.initial_score);
  j["bad_epochs"] = state.bad_epochs;
  j["finished"] = state.finished;
  j["optimizer"] = optimizer_name(state.optimizer.kind());
  j["optimizer_steps"] = state.optimizer.steps();
  j["rng_state"] = state.rng.state();
  nlohmann::json log = nlohmann::json::array();
  for (const auto& r : state.log)
    log.push_back({r.epoch, text::format_double(r.loss), text::format_double(r.val_ndcg)});
  j["log"] = log;
  text::write_file(sdir / "trainer.json", j.dump(2) + "\n");
}

ModelParams load_checkpoint_params(const std::filesystem::path& dir) {
  return read_params(dir, "params_");
}

TrainState load_checkpoint(const std::filesystem::path& dir, const TrainConfig& config) {
  const auto sdir = dir / "state";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(sdir / "trainer.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "checkpoint state: " + std::string(e.what()));
  }
  auto num = [](const nlohmann::json& v) {
    auto d = text::parse_double(v.get<std::string>());
    if (!d) fail(ErrorCode::kParse, "checkpoint state: bad number");
    return *d;
  };
  TrainState s;
  try {
    s.best = read_params(dir, "params_");
    s.params = read_params(sdir, "current_");
    const auto kind = j.at("optimizer").get<std::string>() == "adam" ? OptimizerKind::kAdam
                                                                      : OptimizerKind::kSgd;
    if (kind != config.optimizer)
      fail(ErrorCode::kMismatch, "checkpoint optimizer differs from the configured one");
    s.optimizer = Optimizer(kind, config.learning_rate, s.params);
    if (kind == OptimizerKind::kAdam) {
      s.optimizer.first_moment = read_params(sdir, "adam_m_");
      s.optimizer.second_moment = read_params(sdir, "adam_v_");
    }
    s.optimizer.set_steps(j.at("optimizer_steps").get<std::uint64_t>());
    s.rng.restore(j.at("rng_state").get<std::string>());
    s.epoch = j.at("epoch").get<std::size_t>();
    s.best_epoch = j.at("best_epoch").get<std::size_t>();
    s.best_score = num(j.at("best_score"));
    s.initial_score = num(j.at("initial_score"));
    s.bad_epochs = j.at("bad_epochs").get<std::size_t>();
    s.finished = j.at("finished").get<bool>();
    for (const auto& r : j.at("log"))
      s.log.push_back({r.at(0).get<std::size_t>(), num(r.at(1)), num(r.at(2)), 0.0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "checkpoint state: " + std::string(e.what()));
  }
  return s;
}

std::string format_training_log(const std::vector<EpochRecord>& log) {
  std::string out = "epoch\tloss\tval_ndcg\n";
  for (const auto& r : log) {
    out += std::to_string(r.epoch) + '\t' + text::format_double(r.loss) + '\t' +
           text::format_double(r.val_ndcg) + '\n';
  }
  return out;
}

}  // namespace kguf::model
