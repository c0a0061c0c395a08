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


#ifndef KGFORGE_EVALUATOR_H_
#define KGFORGE_EVALUATOR_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgforge/graph.h"
#include "kgforge/models.h"
#include "kgforge/triple_index.h"

namespace kgforge {

enum class Side { kHead, kTail };
enum class Sides { kHead, kTail, kBoth };
enum class CandidatePolicy { kAllEntities, kExcludeAuxiliary };

Sides parse_sides(std::string_view name);
std::string_view sides_name(Sides sides);
CandidatePolicy parse_candidate_policy(std::string_view name);

struct EvalConfig {
  bool filtered = true;
  Sides sides = Sides::kBoth;
  CandidatePolicy candidates = CandidatePolicy::kAllEntities;
  std::vector<int> hits = {1, 3, 10};
  // Entities flagged true are auxiliary; only read under kExcludeAuxiliary.
  std::vector<bool> auxiliary;
  int threads = 1;

  // Throws ConfigError for non-positive or unsorted thresholds.
  void validate() const;
};

struct RankStats {
  double mr = 0.0;
  double mrr = 0.0;
  std::map<int, double> hits;
  std::size_t queries = 0;

  friend bool operator==(const RankStats&, const RankStats&) = default;
};

struct Metrics : RankStats {
  // "head" and/or "tail".
  std::map<std::string, RankStats> sides;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Exact rank histogram. Merging and summarizing are independent of the order
// in which ranks were added.
class RankHistogram {
 public:
  void add(std::size_t rank);
  void merge(const RankHistogram& other);
  RankStats summarize(std::span<const int> hits) const;
  std::size_t count() const { return count_; }

 private:
  std::map<std::size_t, std::size_t> counts_;
  std::size_t count_ = 0;
};

RankStats summarize_ranks(std::span<const std::size_t> ranks,
                          std::span<const int> hits);

// Scores every entity in the `side` slot of the query triple, then counts the
// eligible candidates scoring strictly higher than the true entity. With a
// filter, candidates forming a known triple (other than `triple` itself) are
// not eligible. Returns 1 + that count.
std::size_t rank_candidates(const ModelParams& params, const Triple& triple,
                            Side side, const TripleIndex* filter,
                            const EvalConfig& config);

// Ranks every requested side of every triple. `filter` may be null only when
// config.filtered is false.
Metrics evaluate(const ModelParams& params, std::span<const Triple> triples,
                 const TripleIndex* filter, const EvalConfig& config);

// Raw fractions, per the metrics JSON schema.
nlohmann::json to_json(const Metrics& metrics);
Metrics metrics_from_json(const nlohmann::json& j);

// Human-readable table with H@k and MRR scaled by 100.
std::string format_metrics(const Metrics& metrics);

struct MetricDelta {
  std::string name;
  double baseline = 0.0;
  double refined = 0.0;
  double delta = 0.0;
  bool higher_is_better = true;
  bool improved = false;
};

struct Comparison {
  std::vector<MetricDelta> rows;
  const MetricDelta& at(std::string_view name) const;
};

// Row order: H@k ascending, MR, MRR. Throws ConfigError when the two metric
// sets use different hits thresholds.
Comparison compare_runs(const RankStats& baseline, const RankStats& refined);

nlohmann::json to_json(const Comparison& comparison);
std::string format_comparison(const Comparison& comparison,
                              std::string_view baseline_name = "baseline",
                              std::string_view refined_name = "refined");

}  // namespace kgforge

#endif  // KGFORGE_EVALUATOR_H_
