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


#ifndef KGFORGE_REFINER_H_
#define KGFORGE_REFINER_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgforge/dataset_io.h"
#include "kgforge/graph.h"

namespace kgforge {

// Hierarchy refinement: hierarchy components that occur often enough become
// auxiliary entities, linked to the original entities by new relations.
//
// Relation mode reads each relation label as a path (e.g. Freebase
// "/location/country/capital"). For a training triple (h, r, t) and each kept
// component c of r's path it adds (h, RelatedTo, c) and (t, HasAttribute, c).
//
// Entity mode takes an external hypernym chain per entity, and adds
// (e, HasAttribute, c) for every kept component c of e's chain.

enum class RefinementMode { kRelationHierarchy, kEntityHierarchy };

std::string_view mode_name(RefinementMode mode);
RefinementMode parse_mode(std::string_view name);

struct HierarchyPath {
  std::string owner;
  // Most general first.
  std::vector<std::string> components;
};

struct RefinementConfig {
  RefinementMode mode = RefinementMode::kRelationHierarchy;
  int levels = 3;
  bool exclude_last = false;
  int threshold = 100;
  // A relation label is split on any of these. Leading delimiters are trimmed
  // and empty components dropped.
  std::vector<std::string> delimiters = {"/"};
  std::string head_relation_label = "RelatedTo";
  std::string tail_relation_label = "HasAttribute";
  // Prepended to each kept component to form the auxiliary entity label.
  std::string auxiliary_prefix = "##attr:";

  // Mode-specific defaults: relation mode keeps the last 3 levels with
  // threshold 100; entity mode drops the entity itself, keeps 3 levels and
  // uses threshold 50.
  static RefinementConfig for_mode(RefinementMode mode);

  // Throws ConfigError on levels < 1, threshold < 1, empty labels or
  // delimiters.
  void validate() const;
};

struct RefinementReport {
  RefinementMode mode = RefinementMode::kRelationHierarchy;
  int threshold = 0;
  int levels = 0;
  // Occurrence count of every extracted component.
  std::map<std::string, std::size_t> frequencies;
  // Components with count >= threshold, sorted.
  std::vector<std::string> kept;
  std::size_t auxiliary_nodes = 0;
  // New relation label -> triples added under it.
  std::map<std::string, std::size_t> added_triples;
  DatasetStats stats_before;
  DatasetStats stats_after;

  std::size_t total_added() const;
};

nlohmann::json to_json(const RefinementReport& report);

std::vector<std::string> split_path(std::string_view label,
                                    std::span<const std::string> delimiters);

// The last `levels` components, after dropping the final one when
// `exclude_last`. Shorter paths yield what remains (possibly nothing).
std::vector<std::string> extract_components(
    std::span<const std::string> components, int levels, bool exclude_last);

// Entity label -> hierarchy. Lines are `label<TAB>comp1|comp2|...`.
using HierarchyRecords = std::map<std::string, std::vector<std::string>, std::less<>>;

HierarchyRecords parse_hierarchy(std::istream& in);
HierarchyRecords load_hierarchy(const std::filesystem::path& path);

struct ComponentSelection {
  std::map<std::string, std::size_t> frequencies;
  std::vector<std::string> kept;
};

// Relation mode: each training triple counts once per distinct component of
// its relation's extracted path. Entity mode: each dataset entity with a
// record counts once per distinct extracted component. Throws ConfigError in
// entity mode when `records` is null or empty.
ComponentSelection count_and_select(const Dataset& dataset,
                                    const RefinementConfig& config,
                                    const HierarchyRecords* records = nullptr);

struct RefinementResult {
  Dataset dataset;
  RefinementReport report;
};

// Appends one auxiliary entity per kept component (sorted order) and the new
// relations, then appends deduplicated augmentation triples to train.
// Throws CollisionError when an auxiliary or relation label already exists.
RefinementResult augment(const Dataset& dataset,
                         std::span<const std::string> kept,
                         const RefinementConfig& config,
                         const HierarchyRecords* records = nullptr);

// count_and_select followed by augment.
RefinementResult refine(const Dataset& dataset, const RefinementConfig& config,
                        const HierarchyRecords* records = nullptr);

// Writes the dataset via write_dataset plus report.json.
void write_refined(const RefinementResult& refined,
                   const std::filesystem::path& dir, DataFormat format);

// True for labels produced by augment().
bool is_auxiliary_label(std::string_view label, std::string_view prefix);

}  // namespace kgforge

#endif  // KGFORGE_REFINER_H_
