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
#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "error.hpp"
#include "log.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace kguf::data {

IdMap::IdMap(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  index_.reserve(ids_.size());
  for (Index i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

std::optional<Index> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Index IdMap::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::kInvalidArgument, "unknown id '" + id + "'");
  return it->second;
}

UserItemLists::UserItemLists(std::size_t num_users, std::span<const Interaction> sorted_pairs)
    : offsets_(num_users + 1, 0) {
  items_.reserve(sorted_pairs.size());
  for (const auto& p : sorted_pairs) {
    ++offsets_[p.user + 1];
    items_.push_back(p.item);
  }
  for (std::size_t u = 0; u < num_users; ++u) offsets_[u + 1] += offsets_[u];
}

bool UserItemLists::contains(Index user, Index item) const {
  auto list = items(user);
  return std::binary_search(list.begin(), list.end(), item);
}

void SplitConfig::validate() const {
  for (double f : {train_fraction, test_fraction, val_fraction}) {
    require(std::isfinite(f) && f >= 0.0 && f <= 1.0, "split fractions must lie in [0, 1]");
  }
  require(train_fraction > 0.0, "train fraction must be positive");
  require(std::abs(train_fraction + test_fraction + val_fraction - 1.0) <= 1e-9,
          "split fractions must sum to 1");
}

const std::vector<Interaction>& InteractionDataset::pairs(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

const UserItemLists& InteractionDataset::lists(Split s) const {
  switch (s) {
    case Split::kTrain: return train_lists;
    case Split::kVal: return val_lists;
    case Split::kTest: return test_lists;
  }
  return train_lists;
}

void InteractionDataset::rebuild_lists() {
  for (auto* v : {&train, &val, &test}) std::sort(v->begin(), v->end());
  train_lists = UserItemLists(num_users(), train);
  val_lists = UserItemLists(num_users(), val);
  test_lists = UserItemLists(num_users(), test);
}

void InteractionDataset::check_invariants() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInternal, std::string("dataset invariant violated: ") + what);
  };
  std::vector<bool> user_seen(num_users(), false), item_seen(num_items(), false);
  for (const auto* v : {&train, &val, &test}) {
    check(std::is_sorted(v->begin(), v->end()), "split not sorted");
    check(std::adjacent_find(v->begin(), v->end()) == v->end(), "duplicate pair");
    for (const auto& p : *v) check(p.user < num_users() && p.item < num_items(), "index range");
  }
  for (const auto& p : train) {
    user_seen[p.user] = true;
    item_seen[p.item] = true;
  }
  check(std::all_of(user_seen.begin(), user_seen.end(), [](bool b) { return b; }),
        "user without train interaction");
  check(std::all_of(item_seen.begin(), item_seen.end(), [](bool b) { return b; }),
        "item without train interaction");
  for (const auto& p : val) check(!train_lists.contains(p.user, p.item), "train/val overlap");
  for (const auto& p : test) {
    check(!train_lists.contains(p.user, p.item), "train/test overlap");
    check(!val_lists.contains(p.user, p.item), "val/test overlap");
  }
}

std::vector<RawInteraction> load_interactions(const std::filesystem::path& path, bool has_rating) {
  std::vector<RawInteraction> out;
  text::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty()) return;
    auto cols = text::split(line);
    std::size_t need = has_rating ? 3 : 2;
    auto malformed = [&](const std::string& why) {
      fail(ErrorCode::kParse, path.string() + ":" + std::to_string(n) + ": " + why);
    };
    if (cols.size() < need) malformed("expected at least " + std::to_string(need) + " columns");
    if (cols[0].empty() || cols[1].empty()) malformed("empty user or item id");
    RawInteraction r{std::string(cols[0]), std::string(cols[1]), std::nullopt};
    if (has_rating) {
      auto v = text::parse_double(cols[2]);
      if (!v || !std::isfinite(*v) || *v < 0.0) malformed("rating must be a finite number >= 0");
      r.rating = *v;
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RawInteraction> binarize(const std::vector<RawInteraction>& interactions,
                                     double threshold) {
  std::vector<RawInteraction> out;
  for (const auto& r : interactions) {
    if (!r.rating) fail(ErrorCode::kInvalidArgument, "binarize: interaction without rating");
    if (*r.rating >= threshold) out.push_back(r);
  }
  return out;
}

std::vector<RawInteraction> deduplicate(const std::vector<RawInteraction>& interactions) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : interactions) seen.emplace(r.user_id, r.item_id);
  std::vector<RawInteraction> out;
  out.reserve(seen.size());
  for (const auto& [u, i] : seen) out.push_back({u, i, std::nullopt});
  return out;
}

std::vector<RawInteraction> k_core_filter(const std::vector<RawInteraction>& interactions,
                                          std::size_t k) {
  require(k >= 1, "k-core requires k >= 1");
  auto pairs = deduplicate(interactions);

  std::vector<std::string> uid, iid;
  for (const auto& r : pairs) {
    uid.push_back(r.user_id);
    iid.push_back(r.item_id);
  }
  IdMap users(std::move(uid)), items(std::move(iid));
  const std::size_t nu = users.size(), ni = items.size();

  std::vector<std::vector<std::size_t>> user_edges(nu), item_edges(ni);
  std::vector<std::size_t> udeg(nu, 0), ideg(ni, 0);
  std::vector<Index> eu(pairs.size()), ei(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    eu[e] = users.at(pairs[e].user_id);
    ei[e] = items.at(pairs[e].item_id);
    user_edges[eu[e]].push_back(e);
    item_edges[ei[e]].push_back(e);
    ++udeg[eu[e]];
    ++ideg[ei[e]];
  }

  // Peeling: removing a node below k only lowers its neighbours' degrees, so
  // the fixed point is the unique maximal k-core regardless of queue order.
  std::vector<bool> edge_alive(pairs.size(), true), user_dead(nu, false), item_dead(ni, false);
  std::deque<std::pair<bool, Index>> queue;  // (is_user, index)
  for (Index u = 0; u < nu; ++u)
    if (udeg[u] < k) queue.emplace_back(true, u);
  for (Index i = 0; i < ni; ++i)
    if (ideg[i] < k) queue.emplace_back(false, i);

  while (!queue.empty()) {
    auto [is_user, node] = queue.front();
    queue.pop_front();
    if (is_user ? user_dead[node] : item_dead[node]) continue;
    (is_user ? user_dead[node] : item_dead[node]) = true;
    for (std::size_t e : is_user ? user_edges[node] : item_edges[node]) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = false;
      if (is_user) {
        if (--ideg[ei[e]] < k && !item_dead[ei[e]]) queue.emplace_back(false, ei[e]);
      } else {
        if (--udeg[eu[e]] < k && !user_dead[eu[e]]) queue.emplace_back(true, eu[e]);
      }
    }
  }

  std::vector<RawInteraction> out;
  for (std::size_t e = 0; e < pairs.size(); ++e)
    if (edge_alive[e]) out.push_back(pairs[e]);
  if (out.empty()) {
    fail(ErrorCode::kEmptyCore, std::to_string(k) + "-core of " + std::to_string(pairs.size()) +
                                    " interactions is empty");
  }
  return out;
}

namespace {

std::size_t portion(std::size_t n, double fraction) {
  // The epsilon keeps products such as 25 * 0.08 from flooring to one below.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

struct Assignment {
  std::string user;
  std::string item;
  Split split;
};

}  // namespace

InteractionDataset split(const std::vector<RawInteraction>& interactions,
                         const SplitConfig& config) {
  config.validate();
  auto pairs = deduplicate(interactions);
  std::vector<Assignment> assigned;
  assigned.reserve(pairs.size());

  if (config.mode == SplitMode::kPerUser) {
    // pairs are sorted by (user, item): walk user groups.
    std::size_t user_ordinal = 0;
    for (std::size_t begin = 0; begin < pairs.size(); ++user_ordinal) {
      std::size_t end = begin;
      while (end < pairs.size() && pairs[end].user_id == pairs[begin].user_id) ++end;
      std::vector<std::size_t> order(end - begin);
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = begin + j;
      Rng rng(mix_seed(config.seed, user_ordinal));
      rng.shuffle(order);
      std::size_t n = order.size();
      std::size_t n_test = portion(n, config.test_fraction);
      std::size_t n_val = portion(n, config.val_fraction);
      while (n_test + n_val >= n && n_val > 0) --n_val;
      while (n_test + n_val >= n && n_test > 0) --n_test;
      for (std::size_t j = 0; j < n; ++j) {
        Split s = j < n_test ? Split::kTest : (j < n_test + n_val ? Split::kVal : Split::kTrain);
        assigned.push_back({pairs[order[j]].user_id, pairs[order[j]].item_id, s});
      }
      begin = end;
    }
  } else {
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    Rng rng(mix_seed(config.seed, 0));
    rng.shuffle(order);
    std::size_t n = order.size();
    std::size_t n_test = portion(n, config.test_fraction);
    std::size_t n_val = portion(n, config.val_fraction);
    for (std::size_t j = 0; j < n; ++j) {
      Split s = j < n_test ? Split::kTest : (j < n_test + n_val ? Split::kVal : Split::kTrain);
      assigned.push_back({pairs[order[j]].user_id, pairs[order[j]].item_id, s});
    }
  }

  std::sort(assigned.begin(), assigned.end(), [](const Assignment& a, const Assignment& b) {
    return std::tie(a.user, a.item) < std::tie(b.user, b.item);
  });

  // Repair pass: every user and every item needs a training interaction. The
  // moved interaction is the first held-out one in (user, item) order.
  std::size_t repaired = 0;
  {
    std::map<std::string, bool> user_has_train;
    for (const auto& a : assigned) user_has_train[a.user] |= a.split == Split::kTrain;
    for (auto& a : assigned) {
      if (!user_has_train[a.user]) {
        a.split = Split::kTrain;
        user_has_train[a.user] = true;
        ++repaired;
      }
    }
    std::map<std::string, bool> item_has_train;
    for (const auto& a : assigned) item_has_train[a.item] |= a.split == Split::kTrain;
    for (auto& a : assigned) {
      if (!item_has_train[a.item]) {
        a.split = Split::kTrain;
        item_has_train[a.item] = true;
        ++repaired;
      }
    }
  }
  if (repaired > 0) {
    log::info("split: moved " + std::to_string(repaired) +
              " held-out interactions to train to cover every user and item");
  }

  std::vector<std::string> uid, iid;
  for (const auto& a : assigned) {
    uid.push_back(a.user);
    iid.push_back(a.item);
  }
  InteractionDataset ds;
  ds.users = IdMap(std::move(uid));
  ds.items = IdMap(std::move(iid));
  ds.repaired_to_train = repaired;
  for (const auto& a : assigned) {
    Interaction p{ds.users.at(a.user), ds.items.at(a.item)};
    switch (a.split) {
      case Split::kTrain: ds.train.push_back(p); break;
      case Split::kVal: ds.val.push_back(p); break;
      case Split::kTest: ds.test.push_back(p); break;
    }
  }
  ds.rebuild_lists();
  return ds;
}

namespace {

const char* split_file(Split s) {
  switch (s) {
    case Split::kTrain: return "train.tsv";
    case Split::kVal: return "val.tsv";
    case Split::kTest: return "test.tsv";
  }
  return "";
}

}  // namespace

void write_split_files(const std::filesystem::path& dir, const InteractionDataset& dataset) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    std::ostringstream os;
    for (const auto& p : dataset.pairs(s))
      os << dataset.users.id(p.user) << '\t' << dataset.items.id(p.item) << '\n';
    text::write_file(dir / split_file(s), os.str());
  }
}

InteractionDataset read_split_files(const std::filesystem::path& dir) {
  std::vector<RawInteraction> parts[3];
  const Split order[3] = {Split::kTrain, Split::kVal, Split::kTest};
  for (int s = 0; s < 3; ++s) parts[s] = load_interactions(dir / split_file(order[s]), false);

  std::vector<std::string> uid, iid;
  for (const auto& r : parts[0]) {
    uid.push_back(r.user_id);
    iid.push_back(r.item_id);
  }
  InteractionDataset ds;
  ds.users = IdMap(std::move(uid));
  ds.items = IdMap(std::move(iid));
  std::vector<Interaction>* targets[3] = {&ds.train, &ds.val, &ds.test};
  for (int s = 0; s < 3; ++s) {
    auto& target = *targets[s];
    for (const auto& r : parts[s]) {
      auto u = ds.users.find(r.user_id);
      auto i = ds.items.find(r.item_id);
      if (!u || !i) {
        fail(ErrorCode::kParse, "split files in '" + dir.string() + "' reference '" + r.user_id +
                                    "'/'" + r.item_id + "' which has no training interaction");
      }
      target.push_back({*u, *i});
    }
  }
  ds.rebuild_lists();
  ds.check_invariants();
  return ds;
}

}  // namespace kguf::data
