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


#include "kgforge/refiner.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "kgforge/errors.h"
#include "triple_key.h"

namespace kgforge {

namespace fs = std::filesystem;

std::string_view mode_name(RefinementMode mode) {
  return mode == RefinementMode::kRelationHierarchy ? "relation" : "entity";
}

RefinementMode parse_mode(std::string_view name) {
  if (name == "relation") return RefinementMode::kRelationHierarchy;
  if (name == "entity") return RefinementMode::kEntityHierarchy;
  throw ConfigError("unknown refinement mode '" + std::string(name) +
                    "' (expected relation or entity)");
}

RefinementConfig RefinementConfig::for_mode(RefinementMode mode) {
  RefinementConfig config;
  config.mode = mode;
  if (mode == RefinementMode::kEntityHierarchy) {
    config.exclude_last = true;
    config.threshold = 50;
  }
  return config;
}

void RefinementConfig::validate() const {
  if (levels < 1) throw ConfigError("levels must be >= 1");
  if (threshold < 1) throw ConfigError("threshold must be >= 1");
  if (delimiters.empty()) throw ConfigError("at least one delimiter is required");
  for (const auto& d : delimiters) {
    if (d.empty()) throw ConfigError("delimiters must be non-empty");
  }
  if (tail_relation_label.empty() ||
      (mode == RefinementMode::kRelationHierarchy && head_relation_label.empty())) {
    throw ConfigError("new relation labels must be non-empty");
  }
  if (mode == RefinementMode::kRelationHierarchy &&
      head_relation_label == tail_relation_label) {
    throw ConfigError("head and tail relation labels must differ");
  }
}

std::size_t RefinementReport::total_added() const {
  std::size_t total = 0;
  for (const auto& [label, n] : added_triples) total += n;
  return total;
}

nlohmann::json to_json(const RefinementReport& report) {
  nlohmann::json added = nlohmann::json::object();
  for (const auto& [label, n] : report.added_triples) added[label] = n;
  nlohmann::json frequencies = nlohmann::json::object();
  for (const auto& [component, n] : report.frequencies) frequencies[component] = n;
  return {{"mode", mode_name(report.mode)},
          {"threshold", report.threshold},
          {"levels", report.levels},
          {"kept_count", report.kept.size()},
          {"auxiliary_nodes", report.auxiliary_nodes},
          {"added_triples", added},
          {"added_triples_total", report.total_added()},
          {"stats_before", to_json(report.stats_before)},
          {"stats_after", to_json(report.stats_after)},
          {"kept", report.kept},
          {"frequencies", frequencies}};
}

std::vector<std::string> split_path(std::string_view label,
                                    std::span<const std::string> delimiters) {
  std::vector<std::string> parts;
  std::string current;
  std::size_t i = 0;
  while (i < label.size()) {
    std::size_t matched = 0;
    for (const std::string& d : delimiters) {
      if (d.size() > matched && label.substr(i, d.size()) == d) matched = d.size();
    }
    if (matched > 0) {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
      i += matched;
    } else {
      current.push_back(label[i]);
      ++i;
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

std::vector<std::string> extract_components(
    std::span<const std::string> components, int levels, bool exclude_last) {
  std::size_t end = components.size();
  if (exclude_last && end > 0) --end;
  const std::size_t want = levels > 0 ? static_cast<std::size_t>(levels) : 0;
  const std::size_t begin = end > want ? end - want : 0;
  return {components.begin() + static_cast<std::ptrdiff_t>(begin),
          components.begin() + static_cast<std::ptrdiff_t>(end)};
}

HierarchyRecords parse_hierarchy(std::istream& in) {
  HierarchyRecords records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("expected 'entity<TAB>comp1|comp2|...'", line_no);
    }
    static const std::vector<std::string> kBar = {"|"};
    std::vector<std::string> components =
        split_path(std::string_view(line).substr(tab + 1), kBar);
    if (components.empty()) throw ParseError("empty hierarchy", line_no);
    auto [it, inserted] =
        records.emplace(line.substr(0, tab), std::move(components));
    if (!inserted) {
      throw ParseError("duplicate hierarchy record for '" + it->first + "'",
                       line_no);
    }
  }
  return records;
}

HierarchyRecords load_hierarchy(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open hierarchy file " + path.string(), 0);
  try {
    return parse_hierarchy(in);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), 0);
  }
}

namespace {

std::vector<std::string> distinct_in_order(std::vector<std::string> items) {
  std::vector<std::string> out;
  for (auto& item : items) {
    if (std::find(out.begin(), out.end(), item) == out.end()) {
      out.push_back(std::move(item));
    }
  }
  return out;
}

// Distinct extracted components for every relation id.
std::vector<std::vector<std::string>> relation_components(
    const Dataset& dataset, const RefinementConfig& config) {
  std::vector<std::vector<std::string>> out(dataset.num_relations());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto parts =
        split_path(dataset.vocab.relations.labels()[r], config.delimiters);
    out[r] = distinct_in_order(
        extract_components(parts, config.levels, config.exclude_last));
  }
  return out;
}

// Distinct extracted components per entity id, empty for entities without a
// record.
std::vector<std::vector<std::string>> entity_components(
    const Dataset& dataset, const RefinementConfig& config,
    const HierarchyRecords* records) {
  if (records == nullptr || records->empty()) {
    throw ConfigError("entity mode requires hierarchy records");
  }
  std::vector<std::vector<std::string>> out(dataset.num_entities());
  for (std::size_t e = 0; e < out.size(); ++e) {
    auto it = records->find(dataset.vocab.entities.labels()[e]);
    if (it == records->end()) continue;
    out[e] = distinct_in_order(
        extract_components(it->second, config.levels, config.exclude_last));
  }
  return out;
}

}  // namespace

ComponentSelection count_and_select(const Dataset& dataset,
                                    const RefinementConfig& config,
                                    const HierarchyRecords* records) {
  config.validate();
  ComponentSelection selection;
  if (config.mode == RefinementMode::kRelationHierarchy) {
    std::vector<std::size_t> triples_per_relation(dataset.num_relations(), 0);
    for (const Triple& t : dataset.train) {
      ++triples_per_relation[static_cast<std::size_t>(t.relation)];
    }
    const auto components = relation_components(dataset, config);
    for (std::size_t r = 0; r < components.size(); ++r) {
      if (triples_per_relation[r] == 0) continue;
      for (const auto& c : components[r]) {
        selection.frequencies[c] += triples_per_relation[r];
      }
    }
  } else {
    for (const auto& comps : entity_components(dataset, config, records)) {
      for (const auto& c : comps) ++selection.frequencies[c];
    }
  }
  const auto threshold = static_cast<std::size_t>(config.threshold);
  for (const auto& [component, count] : selection.frequencies) {
    if (count >= threshold) selection.kept.push_back(component);
  }
  return selection;
}

RefinementResult augment(const Dataset& dataset,
                         std::span<const std::string> kept,
                         const RefinementConfig& config,
                         const HierarchyRecords* records) {
  config.validate();
  std::vector<std::string> sorted_kept(kept.begin(), kept.end());
  std::sort(sorted_kept.begin(), sorted_kept.end());
  sorted_kept.erase(std::unique(sorted_kept.begin(), sorted_kept.end()),
                    sorted_kept.end());

  RefinementResult result;
  result.dataset = dataset;
  Dataset& out = result.dataset;
  RefinementReport& report = result.report;
  report.mode = config.mode;
  report.threshold = config.threshold;
  report.levels = config.levels;
  report.kept = sorted_kept;
  report.stats_before = dataset_stats(dataset);

  std::map<std::string, EntityId, std::less<>> node_of;
  for (const auto& component : sorted_kept) {
    const std::string label = config.auxiliary_prefix + component;
    if (out.vocab.entities.contains(label)) {
      throw CollisionError("auxiliary node label '" + label +
                           "' collides with an existing entity");
    }
    node_of.emplace(component, out.vocab.entities.insert_new(label));
  }
  report.auxiliary_nodes = node_of.size();

  auto new_relation = [&](const std::string& label) {
    if (out.vocab.relations.contains(label)) {
      throw CollisionError("relation label '" + label + "' already exists");
    }
    return out.vocab.relations.insert_new(label);
  };

  std::unordered_set<internal::TripleKey> added;
  std::size_t original_train = out.train.size();
  auto add = [&](EntityId head, RelationId relation, EntityId tail,
                 std::size_t& counter) {
    const Triple t{head, relation, tail};
    if (added.insert(internal::pack(t)).second) {
      out.train.push_back(t);
      ++counter;
    }
  };

  if (config.mode == RefinementMode::kRelationHierarchy) {
    const RelationId related_to = new_relation(config.head_relation_label);
    const RelationId has_attribute = new_relation(config.tail_relation_label);
    std::size_t& head_count = report.added_triples[config.head_relation_label];
    std::size_t& tail_count = report.added_triples[config.tail_relation_label];

    // Kept auxiliary nodes per relation, in path order.
    std::vector<std::vector<EntityId>> nodes_per_relation;
    for (const auto& comps : relation_components(dataset, config)) {
      auto& nodes = nodes_per_relation.emplace_back();
      for (const auto& c : comps) {
        if (auto it = node_of.find(c); it != node_of.end()) {
          nodes.push_back(it->second);
        }
      }
    }
    for (std::size_t i = 0; i < original_train; ++i) {
      const Triple t = out.train[i];
      for (EntityId node : nodes_per_relation[static_cast<std::size_t>(t.relation)]) {
        add(t.head, related_to, node, head_count);
        add(t.tail, has_attribute, node, tail_count);
      }
    }
  } else {
    const auto components = entity_components(dataset, config, records);
    const RelationId has_attribute = new_relation(config.tail_relation_label);
    std::size_t& count = report.added_triples[config.tail_relation_label];
    for (std::size_t e = 0; e < components.size(); ++e) {
      for (const auto& c : components[e]) {
        if (auto it = node_of.find(c); it != node_of.end()) {
          add(static_cast<EntityId>(e), has_attribute, it->second, count);
        }
      }
    }
  }

  report.stats_after = dataset_stats(out);
  return result;
}

RefinementResult refine(const Dataset& dataset, const RefinementConfig& config,
                        const HierarchyRecords* records) {
  ComponentSelection selection = count_and_select(dataset, config, records);
  RefinementResult result = augment(dataset, selection.kept, config, records);
  result.report.frequencies = std::move(selection.frequencies);
  return result;
}

void write_refined(const RefinementResult& refined, const fs::path& dir,
                   DataFormat format) {
  write_dataset(refined.dataset, dir, format);
  const fs::path report_path = dir / "report.json";
  std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + report_path.string());
  out << to_json(refined.report).dump(2) << '\n';
  out.close();
  if (!out) throw std::runtime_error("write failed: " + report_path.string());
}

bool is_auxiliary_label(std::string_view label, std::string_view prefix) {
  return !prefix.empty() && label.substr(0, prefix.size()) == prefix;
}

}  // namespace kgforge
