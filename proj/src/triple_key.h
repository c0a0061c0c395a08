/*
 * Copyright 2026 The kgforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef KGFORGE_SRC_TRIPLE_KEY_H_
#define KGFORGE_SRC_TRIPLE_KEY_H_

#include <cstdint>
#include <stdexcept>

#include "kgforge/graph.h"

namespace kgforge::internal {

// 24 bits per entity, 16 bits for the relation.
using TripleKey = std::uint64_t;

inline constexpr std::int64_t kMaxEntities = std::int64_t{1} << 24;
inline constexpr std::int64_t kMaxRelations = std::int64_t{1} << 16;

inline std::uint64_t pack_pair(std::int32_t a, std::int32_t b, int b_bits) {
  return (static_cast<std::uint64_t>(a) << b_bits) | static_cast<std::uint64_t>(b);
}

inline TripleKey pack(const Triple& t) {
  if (t.head < 0 || t.head >= kMaxEntities || t.tail < 0 ||
      t.tail >= kMaxEntities || t.relation < 0 || t.relation >= kMaxRelations) {
    throw std::out_of_range("triple id exceeds index capacity");
  }
  return (static_cast<std::uint64_t>(t.head) << 40) |
         (static_cast<std::uint64_t>(t.relation) << 24) |
         static_cast<std::uint64_t>(t.tail);
}

}  // namespace kgforge::internal

#endif  // KGFORGE_SRC_TRIPLE_KEY_H_
