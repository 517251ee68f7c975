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
#include "toy.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace kguf::toy {

namespace {

std::string name(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, n);
  return buf;
}

}  // namespace

void generate(const std::filesystem::path& dir, std::uint64_t seed, const ToyShape& shape) {
  require(shape.genres >= 2 && shape.items_per_genre >= 1 && shape.users_per_genre >= 1,
          "toy: degenerate shape");
  const std::size_t num_items = shape.genres * shape.items_per_genre;
  require(shape.unlinked_items < num_items, "toy: too many unlinked items");
  Rng rng(mix_seed(seed, 1));

  std::string interactions;
  std::uint64_t clock = 1700000000;
  for (std::size_t g = 0; g < shape.genres; ++g) {
    for (std::size_t k = 0; k < shape.users_per_genre; ++k) {
      const std::string user = name("user", g * shape.users_per_genre + k + 1);
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < num_items; ++i)
        if (i / shape.items_per_genre != g) others.push_back(i);
      auto disliked = rng.sample_without_replacement(others, shape.dislikes_per_user);
      for (std::size_t i = 0; i < num_items; ++i) {
        int rating = 0;
        if (i / shape.items_per_genre == g) {
          rating = 4 + static_cast<int>(rng.below(2));
        } else if (std::find(disliked.begin(), disliked.end(), i) != disliked.end()) {
          rating = 1 + static_cast<int>(rng.below(2));
        } else {
          continue;
        }
        clock += 1 + rng.below(600);
        interactions += user + '\t' + name("item", i + 1) + '\t' + std::to_string(rating) + '\t' +
                        std::to_string(clock) + '\n';
      }
    }
  }

  const std::size_t authors = 2 * shape.genres + 2;
  const std::size_t publishers = 3;
  std::string kg, linking;
  for (std::size_t i = 0; i + shape.unlinked_items < num_items; ++i) {
    const std::string entity = "ent:" + name("book", i + 1);
    const std::size_t g = i / shape.items_per_genre;
    kg += entity + "\tgenre\t" + name("genre:", g + 1) + '\n';
    kg += entity + "\tauthor\t" + name("author:", rng.below(authors) + 1) + '\n';
    kg += entity + "\tpublisher\t" + name("publisher:", rng.below(publishers) + 1) + '\n';
    kg += entity + "\tlanguage\tlang:en\n";
    linking += name("item", i + 1) + '\t' + entity + '\n';
  }
  for (std::size_t g = 0; g < shape.genres; ++g)
    kg += name("genre:", g + 1) + "\tbroader\tgenre:fiction\n";
  for (std::size_t a = 0; a < authors; ++a)
    kg += name("author:", a + 1) + "\tbirth_place\t" + name("place:", a % 3 + 1) + '\n';

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string());
  text::write_file(dir / "interactions.tsv", interactions);
  text::write_file(dir / "kg.tsv", kg);
  text::write_file(dir / "linking.tsv", linking);
}

}  // namespace kguf::toy
