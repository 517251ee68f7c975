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

#include <span>
#include <vector>

#include "data.hpp"
#include "matrix.hpp"

namespace kguf::eval {

struct RankedList {
  std::vector<data::Index> items;
  // Set when fewer than k candidates were available.
  bool truncated = false;
};

// Top-k of `scores` over items not listed in `excluded` (sorted). Higher score
// first; equal scores rank the lower item index first.
RankedList rank_topk(std::span<const double> scores, std::size_t k,
                     std::span<const data::Index> excluded);

// Binary relevance, log2 discount; IDCG over min(k, |relevant|) positions.
// `relevant` must be sorted. Returns 0 for an empty relevant set.
double ndcg_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
                 std::size_t k);
double hr_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
               std::size_t k);
double recall_at_k(std::span<const data::Index> ranked, std::span<const data::Index> relevant,
                   std::size_t k);

struct EvalOptions {
  std::size_t k = 10;
  // Also mask the user's items from the other held-out split (validation
  // items when scoring test, test items when scoring validation).
  bool strict = false;
};

struct UserResult {
  data::Index user = 0;
  RankedList ranked;
  std::vector<bool> relevant_flags;
  double ndcg = 0.0;
  double hr = 0.0;
  double recall = 0.0;
};

struct RankingResult {
  std::size_t k = 0;
  // Only users with at least one relevant item in the split, in user order.
  std::vector<UserResult> users;
  double ndcg = 0.0;
  double hr = 0.0;
  double recall = 0.0;
};

// All-unrated protocol: every item outside the user's train set is a candidate.
RankingResult evaluate(const Matrix& user_embeddings, const Matrix& item_embeddings,
                       const data::InteractionDataset& dataset, data::Split split,
                       const EvalOptions& options);

// Linear-interpolated quantile of an unsorted sample; q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace kguf::eval
