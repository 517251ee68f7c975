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
#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"
#include "parallel.hpp"

namespace kguf::graph {

double PropagationGraph::coefficient(data::Index u, data::Index i) const {
  auto first = user_neighbors.begin() + static_cast<std::ptrdiff_t>(user_offsets[u]);
  auto last = user_neighbors.begin() + static_cast<std::ptrdiff_t>(user_offsets[u + 1]);
  auto it = std::lower_bound(first, last, i);
  if (it == last || *it != i) return 0.0;
  return user_coeffs[static_cast<std::size_t>(it - user_neighbors.begin())];
}

PropagationGraph build_graph(const data::InteractionDataset& dataset) {
  if (dataset.train.empty()) fail(ErrorCode::kInvalidArgument, "graph: no train interactions");
  PropagationGraph g;
  g.num_users = dataset.num_users();
  g.num_items = dataset.num_items();

  std::vector<std::size_t> udeg(g.num_users, 0), ideg(g.num_items, 0);
  for (const auto& p : dataset.train) {
    ++udeg[p.user];
    ++ideg[p.item];
  }
  for (std::size_t u = 0; u < g.num_users; ++u)
    if (udeg[u] == 0) fail(ErrorCode::kInternal, "graph: isolated user node");
  for (std::size_t i = 0; i < g.num_items; ++i)
    if (ideg[i] == 0) fail(ErrorCode::kInternal, "graph: isolated item node");

  auto coeff = [&](data::Index u, data::Index i) {
    return 1.0 / std::sqrt(static_cast<double>(udeg[u]) * static_cast<double>(ideg[i]));
  };

  // dataset.train is sorted by (user, item): user rows come out sorted.
  g.user_offsets.assign(g.num_users + 1, 0);
  for (const auto& p : dataset.train) {
    ++g.user_offsets[p.user + 1];
    g.user_neighbors.push_back(p.item);
    g.user_coeffs.push_back(coeff(p.user, p.item));
  }
  for (std::size_t u = 0; u < g.num_users; ++u) g.user_offsets[u + 1] += g.user_offsets[u];

  g.item_offsets.assign(g.num_items + 1, 0);
  for (std::size_t i = 0; i < g.num_items; ++i) g.item_offsets[i + 1] = g.item_offsets[i] + ideg[i];
  g.item_neighbors.resize(dataset.train.size());
  g.item_coeffs.resize(dataset.train.size());
  std::vector<std::size_t> fill(g.item_offsets.begin(), g.item_offsets.end() - 1);
  for (const auto& p : dataset.train) {
    std::size_t slot = fill[p.item]++;
    g.item_neighbors[slot] = p.user;
    g.item_coeffs[slot] = coeff(p.user, p.item);
  }
  return g;
}

ItemKnowledge ItemKnowledge::from_item_features(
    const std::vector<std::vector<kg::FeatureIndex>>& item_features) {
  ItemKnowledge k;
  k.num_items = item_features.size();
  std::map<kg::FeatureIndex, std::uint32_t> row_of;
  for (const auto& fs : item_features)
    for (auto f : fs) row_of.emplace(f, 0);
  for (auto& [f, row] : row_of) {
    row = static_cast<std::uint32_t>(k.feature_of_row.size());
    k.feature_of_row.push_back(f);
  }
  k.offsets.assign(k.num_items + 1, 0);
  for (std::size_t i = 0; i < k.num_items; ++i) {
    std::vector<std::uint32_t> rows;
    for (auto f : item_features[i]) rows.push_back(row_of.at(f));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    k.rows.insert(k.rows.end(), rows.begin(), rows.end());
    k.offsets[i + 1] = k.rows.size();
  }
  return k;
}

void PropagationConfig::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
}

ItemMixing item_mixing(const ItemKnowledge& knowledge, const PropagationConfig& config) {
  ItemMixing m;
  m.knowledge.resize(knowledge.num_items);
  m.collaborative.resize(knowledge.num_items);
  for (data::Index i = 0; i < knowledge.num_items; ++i) {
    std::size_t n = knowledge.rows_of(i).size();
    if (n == 0) {
      m.knowledge[i] = 0.0;
      m.collaborative[i] =
          config.empty_policy == EmptyFeaturePolicy::kCollaborativeOnly ? 1.0 : 1.0 - config.alpha;
    } else {
      m.knowledge[i] = config.alpha / static_cast<double>(n);
      m.collaborative[i] = 1.0 - config.alpha;
    }
  }
  return m;
}

namespace {

// out_u = sum_{i in N(u)} c_ui * w_i * in_i  (w empty = all ones)
void user_gather(const PropagationGraph& g, const Matrix& in, std::span<const double> w,
                 Matrix& out) {
  parallel_for(g.num_users, [&](std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      auto row = out.row(u);
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t e = g.user_offsets[u]; e < g.user_offsets[u + 1]; ++e) {
        data::Index i = g.user_neighbors[e];
        double c = g.user_coeffs[e] * (w.empty() ? 1.0 : w[i]);
        axpy(c, in.row(i), row);
      }
    }
  });
}

// out_i = base_i + scale_i * sum_{u in N(i)} c_ui * in_u   (base may be empty)
void item_gather(const PropagationGraph& g, const Matrix& in, std::span<const double> scale,
                 const Matrix* base, Matrix& out) {
  parallel_for(g.num_items, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.row(i);
      if (base) {
        auto b = base->row(i);
        std::copy(b.begin(), b.end(), row.begin());
      } else {
        std::fill(row.begin(), row.end(), 0.0);
      }
      double s = scale.empty() ? 1.0 : scale[i];
      for (std::size_t e = g.item_offsets[i]; e < g.item_offsets[i + 1]; ++e)
        axpy(s * g.item_coeffs[e], in.row(g.item_neighbors[e]), row);
    }
  });
}

}  // namespace

LayerStack propagate(const Matrix& user_params, const Matrix& item_params,
                     const Matrix& feature_params, const PropagationGraph& graph,
                     const ItemKnowledge& knowledge, const PropagationConfig& config) {
  config.validate();
  const std::size_t d = user_params.cols();
  require(user_params.rows() == graph.num_users && item_params.rows() == graph.num_items,
          "propagate: parameter rows do not match the graph");
  require(item_params.cols() == d && (feature_params.cols() == d || feature_params.rows() == 0),
          "propagate: embedding dimensions differ");
  require(knowledge.num_items == graph.num_items && feature_params.rows() == knowledge.num_rows(),
          "propagate: knowledge does not match parameters");

  const ItemMixing mix = item_mixing(knowledge, config);

  LayerStack stack;
  stack.users.push_back(user_params);
  stack.items.push_back(item_params);
  stack.knowledge = Matrix(graph.num_items, d);
  for (data::Index i = 0; i < graph.num_items; ++i) {
    auto row = stack.knowledge.row(i);
    for (auto r : knowledge.rows_of(i)) axpy(mix.knowledge[i], feature_params.row(r), row);
  }

  for (std::size_t l = 1; l <= config.layers; ++l) {
    Matrix u(graph.num_users, d), it(graph.num_items, d);
    user_gather(graph, stack.items[l - 1], {}, u);
    item_gather(graph, stack.users[l - 1], mix.collaborative, &stack.knowledge, it);
    stack.users.push_back(std::move(u));
    stack.items.push_back(std::move(it));
  }
  return stack;
}

Embeddings combine_layers(const LayerStack& stack) {
  require(!stack.users.empty() && stack.users.size() == stack.items.size(),
          "combine_layers: malformed layer stack");
  Embeddings out{Matrix(stack.users[0].rows(), stack.users[0].cols()),
                 Matrix(stack.items[0].rows(), stack.items[0].cols())};
  for (std::size_t l = 0; l < stack.users.size(); ++l) {
    const double w = 1.0 / (1.0 + static_cast<double>(l));
    axpy(w, stack.users[l].values(), out.users.values());
    axpy(w, stack.items[l].values(), out.items.values());
  }
  return out;
}

ParamGradients backpropagate(const Matrix& grad_users, const Matrix& grad_items,
                             std::size_t feature_rows, const PropagationGraph& graph,
                             const ItemKnowledge& knowledge, const PropagationConfig& config) {
  config.validate();
  const std::size_t d = grad_users.cols();
  const std::size_t L = config.layers;
  const ItemMixing mix = item_mixing(knowledge, config);

  // Adjoints of layer L, then walk down: U^{l+1} = A I^l and
  // I^{l+1} = K + B A^T U^l, so
  //   adj U^l = w_l gU + A B adj I^{l+1}
  //   adj I^l = w_l gI + A^T adj U^{l+1}
  Matrix adj_u(graph.num_users, d), adj_i(graph.num_items, d);
  const double wl = 1.0 / (1.0 + static_cast<double>(L));
  axpy(wl, grad_users.values(), adj_u.values());
  axpy(wl, grad_items.values(), adj_i.values());

  Matrix adj_knowledge(graph.num_items, d);
  Matrix next_u(graph.num_users, d), next_i(graph.num_items, d);
  for (std::size_t l = L; l > 0; --l) {
    axpy(1.0, adj_i.values(), adj_knowledge.values());
    user_gather(graph, adj_i, mix.collaborative, next_u);
    item_gather(graph, adj_u, {}, nullptr, next_i);
    const double w = 1.0 / static_cast<double>(l);  // weight of layer l-1
    axpy(w, grad_users.values(), next_u.values());
    axpy(w, grad_items.values(), next_i.values());
    std::swap(adj_u, next_u);
    std::swap(adj_i, next_i);
  }

  ParamGradients out{std::move(adj_u), std::move(adj_i), Matrix(feature_rows, d)};
  if (L > 0) {
    for (data::Index i = 0; i < graph.num_items; ++i) {
      for (auto r : knowledge.rows_of(i))
        axpy(mix.knowledge[i], adj_knowledge.row(i), out.features.row(r));
    }
  }
  return out;
}

}  // namespace kguf::graph
