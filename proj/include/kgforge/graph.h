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


#ifndef KGFORGE_GRAPH_H_
#define KGFORGE_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace kgforge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct LabeledTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

// Dense bijection between non-empty labels and ids 0..size()-1.
class LabelMap {
 public:
  // Returns the id of `label`, inserting it with the next free id if absent.
  std::int32_t intern(std::string_view label);

  // Inserts a label that must not exist yet. Throws CollisionError otherwise.
  std::int32_t insert_new(std::string_view label);

  std::optional<std::int32_t> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  // Throws std::out_of_range for unknown labels / ids.
  std::int32_t id_of(std::string_view label) const;
  const std::string& label_of(std::int32_t id) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const LabelMap& a, const LabelMap& b) {
    return a.labels_ == b.labels_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int32_t, Hash, std::equal_to<>> ids_;
};

struct Vocabulary {
  LabelMap entities;
  LabelMap relations;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

struct Dataset {
  Vocabulary vocab;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  std::size_t num_entities() const { return vocab.entities.size(); }
  std::size_t num_relations() const { return vocab.relations.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const Dataset& dataset);
nlohmann::json to_json(const DatasetStats& stats);
DatasetStats stats_from_json(const nlohmann::json& j);

struct LabeledSplits {
  std::vector<LabeledTriple> train;
  std::vector<LabeledTriple> valid;
  std::vector<LabeledTriple> test;
};

struct IndexResult {
  Dataset dataset;
  // Triples dropped because they repeated an earlier triple of the same split.
  std::size_t duplicates_train = 0;
  std::size_t duplicates_valid = 0;
  std::size_t duplicates_test = 0;

  std::size_t duplicates() const {
    return duplicates_train + duplicates_valid + duplicates_test;
  }
};

// Assigns ids in first-appearance order over train, valid, test (head,
// relation, tail within a line). Labels already in `existing` keep their ids.
IndexResult index_dataset(const LabeledSplits& splits,
                          const Vocabulary* existing = nullptr);

// Removes repeated triples, keeping the first occurrence. Returns the number
// removed.
std::size_t deduplicate(std::vector<Triple>& triples);

// Throws std::out_of_range if any id of any split is outside the vocabulary.
void validate_ids(const Dataset& dataset);

LabeledTriple label(const Vocabulary& vocab, const Triple& triple);

}  // namespace kgforge

#endif  // KGFORGE_GRAPH_H_
