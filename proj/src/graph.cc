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


#include "kgforge/graph.h"

#include <stdexcept>
#include <unordered_set>

#include "kgforge/errors.h"
#include "triple_key.h"

namespace kgforge {

std::int32_t LabelMap::intern(std::string_view label) {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  return insert_new(label);
}

std::int32_t LabelMap::insert_new(std::string_view label) {
  if (label.empty()) throw std::invalid_argument("empty label");
  if (ids_.find(label) != ids_.end()) {
    throw CollisionError("label already present: " + std::string(label));
  }
  const auto id = static_cast<std::int32_t>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::int32_t> LabelMap::find(std::string_view label) const {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::int32_t LabelMap::id_of(std::string_view label) const {
  if (auto id = find(label)) return *id;
  throw std::out_of_range("unknown label: " + std::string(label));
}

const std::string& LabelMap::label_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
    throw std::out_of_range("id out of range: " + std::to_string(id));
  }
  return labels_[static_cast<std::size_t>(id)];
}

DatasetStats dataset_stats(const Dataset& dataset) {
  return {dataset.num_entities(), dataset.num_relations(), dataset.train.size(),
          dataset.valid.size(), dataset.test.size()};
}

nlohmann::json to_json(const DatasetStats& stats) {
  return {{"entities", stats.entities},
          {"relations", stats.relations},
          {"train", stats.train},
          {"valid", stats.valid},
          {"test", stats.test}};
}

DatasetStats stats_from_json(const nlohmann::json& j) {
  return {j.at("entities").get<std::size_t>(),
          j.at("relations").get<std::size_t>(),
          j.at("train").get<std::size_t>(), j.at("valid").get<std::size_t>(),
          j.at("test").get<std::size_t>()};
}

std::size_t deduplicate(std::vector<Triple>& triples) {
  std::unordered_set<internal::TripleKey> seen;
  seen.reserve(triples.size());
  std::size_t kept = 0;
  for (const Triple& t : triples) {
    if (seen.insert(internal::pack(t)).second) triples[kept++] = t;
  }
  const std::size_t removed = triples.size() - kept;
  triples.resize(kept);
  return removed;
}

namespace {

std::vector<Triple> index_split(const std::vector<LabeledTriple>& split,
                                Vocabulary& vocab) {
  std::vector<Triple> out;
  out.reserve(split.size());
  for (const LabeledTriple& lt : split) {
    Triple t;
    t.head = vocab.entities.intern(lt.head);
    t.relation = vocab.relations.intern(lt.relation);
    t.tail = vocab.entities.intern(lt.tail);
    out.push_back(t);
  }
  return out;
}

}  // namespace

IndexResult index_dataset(const LabeledSplits& splits,
                          const Vocabulary* existing) {
  IndexResult result;
  if (existing != nullptr) result.dataset.vocab = *existing;
  Vocabulary& vocab = result.dataset.vocab;
  result.dataset.train = index_split(splits.train, vocab);
  result.dataset.valid = index_split(splits.valid, vocab);
  result.dataset.test = index_split(splits.test, vocab);
  result.duplicates_train = deduplicate(result.dataset.train);
  result.duplicates_valid = deduplicate(result.dataset.valid);
  result.duplicates_test = deduplicate(result.dataset.test);
  return result;
}

void validate_ids(const Dataset& dataset) {
  const auto ne = static_cast<std::int64_t>(dataset.num_entities());
  const auto nr = static_cast<std::int64_t>(dataset.num_relations());
  for (const auto* split : {&dataset.train, &dataset.valid, &dataset.test}) {
    for (const Triple& t : *split) {
      if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne ||
          t.relation < 0 || t.relation >= nr) {
        throw std::out_of_range("triple (" + std::to_string(t.head) + ", " +
                                std::to_string(t.relation) + ", " +
                                std::to_string(t.tail) +
                                ") references an id outside the vocabulary");
      }
    }
  }
}

LabeledTriple label(const Vocabulary& vocab, const Triple& triple) {
  return {vocab.entities.label_of(triple.head),
          vocab.relations.label_of(triple.relation),
          vocab.entities.label_of(triple.tail)};
}

}  // namespace kgforge
