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


#include "kgforge/triple_index.h"

#include <algorithm>

#include "triple_key.h"

namespace kgforge {

namespace {

std::uint64_t head_relation_key(EntityId head, RelationId relation) {
  return internal::pack_pair(head, relation, 16);
}

std::uint64_t relation_tail_key(RelationId relation, EntityId tail) {
  return internal::pack_pair(relation, tail, 24);
}

}  // namespace

TripleIndex::TripleIndex(std::initializer_list<std::span<const Triple>> lists) {
  for (auto list : lists) add_all(list);
  finalize();
}

TripleIndex::TripleIndex(const std::vector<std::span<const Triple>>& lists) {
  for (auto list : lists) add_all(list);
  finalize();
}

void TripleIndex::add_all(std::span<const Triple> triples) {
  for (const Triple& t : triples) {
    if (!members_.insert(internal::pack(t)).second) continue;
    tails_[head_relation_key(t.head, t.relation)].push_back(t.tail);
    heads_[relation_tail_key(t.relation, t.tail)].push_back(t.head);
  }
}

void TripleIndex::finalize() {
  for (auto& [key, ids] : tails_) std::sort(ids.begin(), ids.end());
  for (auto& [key, ids] : heads_) std::sort(ids.begin(), ids.end());
}

bool TripleIndex::contains(const Triple& t) const {
  if (t.head < 0 || t.tail < 0 || t.relation < 0 ||
      t.head >= internal::kMaxEntities || t.tail >= internal::kMaxEntities ||
      t.relation >= internal::kMaxRelations) {
    return false;
  }
  return members_.count(internal::pack(t)) != 0;
}

std::span<const EntityId> TripleIndex::tails_of(EntityId head,
                                                RelationId relation) const {
  auto it = tails_.find(head_relation_key(head, relation));
  if (it == tails_.end()) return {};
  return it->second;
}

std::span<const EntityId> TripleIndex::heads_of(RelationId relation,
                                                EntityId tail) const {
  auto it = heads_.find(relation_tail_key(relation, tail));
  if (it == heads_.end()) return {};
  return it->second;
}

TripleIndex build_index(const Dataset& dataset) {
  return TripleIndex({std::span<const Triple>(dataset.train),
                      std::span<const Triple>(dataset.valid),
                      std::span<const Triple>(dataset.test)});
}

}  // namespace kgforge
