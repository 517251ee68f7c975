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

// Small synthetic dataset with preferences aligned to one KG feature.
//
// Items fall into genre clusters. Every user rates all items of one genre
// 4 or 5 and a few items of other genres 1 or 2, so after binarization a
// user's positives are exactly the items of one genre. The KG attaches a
// genre, an author, a publisher and a language to each linked item, plus a
// few two-hop triples that must not become features. The last items of the
// catalog are left unlinked.
namespace kguf::toy {

struct ToyShape {
  std::size_t genres = 3;
  std::size_t items_per_genre = 16;
  std::size_t users_per_genre = 14;
  std::size_t dislikes_per_user = 3;
  std::size_t unlinked_items = 2;
};

// Writes interactions.tsv (user, item, rating, timestamp), kg.tsv and
// linking.tsv into dir. Output depends only on (shape, seed).
void generate(const std::filesystem::path& dir, std::uint64_t seed = 2024,
              const ToyShape& shape = {});

}  // namespace kguf::toy
