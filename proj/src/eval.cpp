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
#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>

#include "error.hpp"
#include "parallel.hpp"

namespace kguf::eval {

RankedList rank_topk(std::span<const double> scores, std::size_t k,
                     std::span<const data::Index> excluded) {
  require(k >= 1, "rank_topk: k must be >= 1");
  std::vector<data::Index> candidates;
  candidates.reserve(scores.size());
  std::size_t e = 0;
  for (data::Index i = 0; i < scores.size(); ++i) {
    while (e < excluded.size() && excluded[e] < i) ++e;
    if (e < excluded.size() && excluded[e] == i) continue;
    candidates.push_back(i);
  }
  RankedList out;
  out.truncated = candidates.size() < k;
  const std::size_t n = std::min(k, candidates.size());
  auto better = [&](data::Index a, data::Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), better);
  candidates.resize(n);
  out.items = std::move(candidates);
  return out;
}

namespace {

bool is_relevant(std::span<const data::Index> relevant, data::Index item) {
  return std::binary_search(relevant.begin(), relevant.end(), item);
}

std::size_t hits(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
                 std::size_t k) {
  std::size_t h = 0;
  for (std::size_t p = 0; p < std::min(k, ranked.size()); ++p)
    h += is_relevant(relevant, ranked[p]) ? 1 : 0;
  return h;
}

}  // namespace

double ndcg_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
                 std::size_t k) {
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, ranked.size()); ++p)
    if (is_relevant(relevant, ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  double idcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, relevant.size()); ++p)
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

double hr_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
               std::size_t k) {
  return hits(ranked, relevant, k) > 0 ? 1.0 : 0.0;
}

double recall_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
                   std::size_t k) {
  if (relevant.empty()) return 0.0;
  return static_cast<double>(hits(ranked, relevant, k)) / static_cast<double>(relevant.size());
}

RankingResult evaluate(const Matrix& user_embeddings, const Matrix& item_embeddings,
                       const data::InteractionDataset& dataset, data::Split split,
                       const EvalOptions& options) {
  require(split != data::Split::kTrain, "evaluate: train split cannot be evaluated");
  require(user_embeddings.rows() == dataset.num_users() &&
              item_embeddings.rows() == dataset.num_items() &&
              user_embeddings.cols() == item_embeddings.cols(),
          "evaluate: embeddings do not match the dataset");
  const auto& relevant_lists = dataset.lists(split);
  const auto& other_lists =
      dataset.lists(split == data::Split::kVal ? data::Split::kTest : data::Split::kVal);

  const std::size_t nu = dataset.num_users();
  std::vector<std::optional<UserResult>> slots(nu);
  parallel_for(
      nu,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> scores(dataset.num_items());
        for (std::size_t uu = begin; uu < end; ++uu) {
          auto u = static_cast<data::Index>(uu);
          auto relevant = relevant_lists.items(u);
          if (relevant.empty()) continue;
          for (data::Index i = 0; i < dataset.num_items(); ++i)
            scores[i] = dot(user_embeddings.row(u), item_embeddings.row(i));
          auto train = dataset.train_lists.items(u);
          std::vector<data::Index> excluded(train.begin(), train.end());
          if (options.strict) {
            auto other = other_lists.items(u);
            std::vector<data::Index> merged;
            std::merge(excluded.begin(), excluded.end(), other.begin(), other.end(),
                       std::back_inserter(merged));
            excluded = std::move(merged);
          }
          UserResult r;
          r.user = u;
          r.ranked = rank_topk(scores, options.k, excluded);
          for (auto i : r.ranked.items) r.relevant_flags.push_back(is_relevant(relevant, i));
          r.ndcg = ndcg_at_k(r.ranked.items, relevant, options.k);
          r.hr = hr_at_k(r.ranked.items, relevant, options.k);
          r.recall = recall_at_k(r.ranked.items, relevant, options.k);
          slots[uu] = std::move(r);
        }
      },
      32);

  RankingResult out;
  out.k = options.k;
  for (auto& s : slots) {
    if (!s) continue;
    out.ndcg += s->ndcg;
    out.hr += s->hr;
    out.recall += s->recall;
    out.users.push_back(std::move(*s));
  }
  if (!out.users.empty()) {
    const double n = static_cast<double>(out.users.size());
    out.ndcg /= n;
    out.hr /= n;
    out.recall /= n;
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace kguf::eval
