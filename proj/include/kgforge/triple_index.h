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


#ifndef KGFORGE_TRIPLE_INDEX_H_
#define KGFORGE_TRIPLE_INDEX_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgforge/graph.h"

namespace kgforge {

// Membership index over one or more triple lists. Answers "is (h, r, t)
// known" and lists the known tails of (h, r) and heads of (r, t), each sorted
// ascending. Immutable after construction.
class TripleIndex {
 public:
  TripleIndex() = default;
  explicit TripleIndex(std::initializer_list<std::span<const Triple>> lists);
  explicit TripleIndex(const std::vector<std::span<const Triple>>& lists);

  bool contains(const Triple& t) const;
  std::span<const EntityId> tails_of(EntityId head, RelationId relation) const;
  std::span<const EntityId> heads_of(RelationId relation, EntityId tail) const;

  // Number of distinct triples.
  std::size_t size() const { return members_.size(); }

 private:
  void add_all(std::span<const Triple> triples);
  void finalize();

  std::unordered_set<std::uint64_t> members_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

// Index over train, valid and test of `dataset`.
TripleIndex build_index(const Dataset& dataset);

}  // namespace kgforge

#endif  // KGFORGE_TRIPLE_INDEX_H_
