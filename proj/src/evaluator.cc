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


#include "kgforge/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "kgforge/errors.h"

namespace kgforge {

Sides parse_sides(std::string_view name) {
  if (name == "head") return Sides::kHead;
  if (name == "tail") return Sides::kTail;
  if (name == "both") return Sides::kBoth;
  throw ConfigError("unknown sides '" + std::string(name) +
                    "' (expected head, tail or both)");
}

std::string_view sides_name(Sides sides) {
  switch (sides) {
    case Sides::kHead: return "head";
    case Sides::kTail: return "tail";
    case Sides::kBoth: return "both";
  }
  return "both";
}

CandidatePolicy parse_candidate_policy(std::string_view name) {
  if (name == "all-entities" || name == "all") return CandidatePolicy::kAllEntities;
  if (name == "exclude-auxiliary") return CandidatePolicy::kExcludeAuxiliary;
  throw ConfigError("unknown candidate policy '" + std::string(name) +
                    "' (expected all-entities or exclude-auxiliary)");
}

void EvalConfig::validate() const {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] <= 0) throw ConfigError("hits thresholds must be positive");
    if (i > 0 && hits[i] <= hits[i - 1]) {
      throw ConfigError("hits thresholds must be strictly increasing");
    }
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

void RankHistogram::add(std::size_t rank) {
  ++counts_[rank];
  ++count_;
}

void RankHistogram::merge(const RankHistogram& other) {
  for (const auto& [rank, n] : other.counts_) counts_[rank] += n;
  count_ += other.count_;
}

RankStats RankHistogram::summarize(std::span<const int> hits) const {
  RankStats stats;
  stats.queries = count_;
  for (int k : hits) stats.hits[k] = 0.0;
  if (count_ == 0) return stats;
  unsigned long long rank_sum = 0;
  double reciprocal_sum = 0.0;
  std::map<int, std::size_t> within;
  for (const auto& [rank, n] : counts_) {
    rank_sum += static_cast<unsigned long long>(rank) * n;
    reciprocal_sum += static_cast<double>(n) / static_cast<double>(rank);
    for (int k : hits) {
      if (rank <= static_cast<std::size_t>(k)) within[k] += n;
    }
  }
  const auto n = static_cast<double>(count_);
  stats.mr = static_cast<double>(rank_sum) / n;
  stats.mrr = reciprocal_sum / n;
  for (int k : hits) stats.hits[k] = static_cast<double>(within[k]) / n;
  return stats;
}

RankStats summarize_ranks(std::span<const std::size_t> ranks,
                          std::span<const int> hits) {
  RankHistogram histogram;
  for (std::size_t r : ranks) histogram.add(r);
  return histogram.summarize(hits);
}

namespace {

// Scores all candidates for one slot of a query. Caches the relation's
// projected entity table, so queries should arrive grouped by relation.
class CandidateScorer {
 public:
  explicit CandidateScorer(const ModelParams& params)
      : params_(params), scores_(params.num_entities) {}

  std::span<const double> score(const Triple& q, Side side) {
    const std::size_t d = params_.dim;
    const std::size_t n = params_.num_entities;
    if (params_.kind == ModelKind::kRotatE) {
      score_rotate(q, side);
      return scores_;
    }
    const double* table = entity_table(q.relation);
    const auto rel = params_.row(Table::kRelation, static_cast<std::size_t>(q.relation));
    if (side == Side::kTail) {
      const double* hp = table + static_cast<std::size_t>(q.head) * d;
      query_.resize(d);
      for (std::size_t i = 0; i < d; ++i) query_[i] = hp[i] + rel[i];
      for (std::size_t c = 0; c < n; ++c) {
        const double* tp = table + c * d;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double v = query_[i] - tp[i];
          sum += v * v;
        }
        scores_[c] = -sum;
      }
    } else {
      const double* tp = table + static_cast<std::size_t>(q.tail) * d;
      for (std::size_t c = 0; c < n; ++c) {
        const double* hp = table + c * d;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double v = (hp[i] + rel[i]) - tp[i];
          sum += v * v;
        }
        scores_[c] = -sum;
      }
    }
    return scores_;
  }

 private:
  const double* entity_table(RelationId relation) {
    if (params_.kind == ModelKind::kTransE) return params_.entity.data();
    if (cached_relation_ != relation) {
      const std::size_t d = params_.dim;
      projected_.resize(params_.num_entities * d);
      for (std::size_t e = 0; e < params_.num_entities; ++e) {
        project_entity(params_, static_cast<EntityId>(e), relation,
                       std::span<double>(projected_).subspan(e * d, d));
      }
      cached_relation_ = relation;
    }
    return projected_.data();
  }

  void score_rotate(const Triple& q, Side side) {
    const std::size_t d = params_.dim;
    const std::size_t n = params_.num_entities;
    const auto phase = params_.row(Table::kRelation, static_cast<std::size_t>(q.relation));
    cos_.resize(d);
    sin_.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      cos_[i] = std::cos(phase[i]);
      sin_[i] = std::sin(phase[i]);
    }
    const double* ent = params_.entity.data();
    if (side == Side::kTail) {
      const double* h = ent + static_cast<std::size_t>(q.head) * 2 * d;
      query_.resize(2 * d);
      for (std::size_t i = 0; i < d; ++i) {
        query_[i] = h[i] * cos_[i] - h[d + i] * sin_[i];
        query_[d + i] = h[i] * sin_[i] + h[d + i] * cos_[i];
      }
      for (std::size_t c = 0; c < n; ++c) {
        const double* t = ent + c * 2 * d;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double dr = query_[i] - t[i];
          const double di = query_[d + i] - t[d + i];
          sum += std::sqrt(dr * dr + di * di);
        }
        scores_[c] = -sum;
      }
    } else {
      const double* t = ent + static_cast<std::size_t>(q.tail) * 2 * d;
      for (std::size_t c = 0; c < n; ++c) {
        const double* h = ent + c * 2 * d;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double dr = (h[i] * cos_[i] - h[d + i] * sin_[i]) - t[i];
          const double di = (h[i] * sin_[i] + h[d + i] * cos_[i]) - t[d + i];
          sum += std::sqrt(dr * dr + di * di);
        }
        scores_[c] = -sum;
      }
    }
  }

  const ModelParams& params_;
  std::vector<double> scores_;
  std::vector<double> query_;
  std::vector<double> projected_;
  std::vector<double> cos_, sin_;
  RelationId cached_relation_ = -1;
};

std::size_t rank_with(CandidateScorer& scorer, const ModelParams& params,
                      const Triple& triple, Side side, const TripleIndex* filter,
                      const EvalConfig& config) {
  const auto scores = scorer.score(triple, side);
  const EntityId truth = side == Side::kTail ? triple.tail : triple.head;
  const bool exclude_aux = config.candidates == CandidatePolicy::kExcludeAuxiliary;
  auto eligible = [&](std::size_t c) {
    return !exclude_aux || c >= config.auxiliary.size() || !config.auxiliary[c];
  };
  if (!eligible(static_cast<std::size_t>(truth))) {
    throw std::logic_error("true entity excluded from the candidate set");
  }
  const double truth_score = scores[static_cast<std::size_t>(truth)];
  std::size_t better = 0;
  for (std::size_t c = 0; c < params.num_entities; ++c) {
    if (scores[c] > truth_score && eligible(c)) ++better;
  }
  if (config.filtered) {
    if (filter == nullptr) throw std::logic_error("filtered ranking without a filter");
    const auto known = side == Side::kTail ? filter->tails_of(triple.head, triple.relation)
                                           : filter->heads_of(triple.relation, triple.tail);
    for (EntityId c : known) {
      if (c == truth) continue;
      const auto ci = static_cast<std::size_t>(c);
      if (ci < params.num_entities && scores[ci] > truth_score && eligible(ci)) {
        --better;
      }
    }
  }
  return better + 1;
}

struct Query {
  Triple triple;
  Side side;
};

}  // namespace

std::size_t rank_candidates(const ModelParams& params, const Triple& triple,
                            Side side, const TripleIndex* filter,
                            const EvalConfig& config) {
  if (triple.head < 0 || triple.tail < 0 || triple.relation < 0 ||
      static_cast<std::size_t>(triple.head) >= params.num_entities ||
      static_cast<std::size_t>(triple.tail) >= params.num_entities ||
      static_cast<std::size_t>(triple.relation) >= params.num_relations) {
    throw std::out_of_range("query triple outside model tables");
  }
  CandidateScorer scorer(params);
  return rank_with(scorer, params, triple, side, filter, config);
}

Metrics evaluate(const ModelParams& params, std::span<const Triple> triples,
                 const TripleIndex* filter, const EvalConfig& config) {
  config.validate();
  if (config.filtered && filter == nullptr) {
    throw ConfigError("filtered evaluation requires a filter index");
  }
  for (const Triple& t : triples) {
    if (t.head < 0 || t.tail < 0 || t.relation < 0 ||
        static_cast<std::size_t>(t.head) >= params.num_entities ||
        static_cast<std::size_t>(t.tail) >= params.num_entities ||
        static_cast<std::size_t>(t.relation) >= params.num_relations) {
      throw std::out_of_range("evaluation triple outside model tables");
    }
  }

  std::vector<Query> queries;
  for (const Triple& t : triples) {
    if (config.sides != Sides::kTail) queries.push_back({t, Side::kHead});
    if (config.sides != Sides::kHead) queries.push_back({t, Side::kTail});
  }
  // Grouping by relation lets each worker reuse its projected entity table.
  std::stable_sort(queries.begin(), queries.end(), [](const Query& a, const Query& b) {
    return a.triple.relation < b.triple.relation;
  });

  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(static_cast<std::size_t>(config.threads), queries.size()));
  std::vector<RankHistogram> head_hist(workers), tail_hist(workers);
  auto run = [&](std::size_t w) {
    CandidateScorer scorer(params);
    const std::size_t begin = queries.size() * w / workers;
    const std::size_t end = queries.size() * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      const Query& q = queries[i];
      const std::size_t rank = rank_with(scorer, params, q.triple, q.side, filter, config);
      (q.side == Side::kHead ? head_hist : tail_hist)[w].add(rank);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  RankHistogram heads, tails, all;
  for (std::size_t w = 0; w < workers; ++w) {
    heads.merge(head_hist[w]);
    tails.merge(tail_hist[w]);
  }
  all.merge(heads);
  all.merge(tails);

  Metrics metrics;
  static_cast<RankStats&>(metrics) = all.summarize(config.hits);
  if (config.sides != Sides::kTail) metrics.sides["head"] = heads.summarize(config.hits);
  if (config.sides != Sides::kHead) metrics.sides["tail"] = tails.summarize(config.hits);
  return metrics;
}

namespace {

nlohmann::json stats_json(const RankStats& s) {
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [k, v] : s.hits) hits[std::to_string(k)] = v;
  return {{"mr", s.mr}, {"mrr", s.mrr}, {"hits", hits}, {"queries", s.queries}};
}

RankStats stats_from(const nlohmann::json& j) {
  RankStats s;
  s.mr = j.at("mr").get<double>();
  s.mrr = j.at("mrr").get<double>();
  for (const auto& [k, v] : j.at("hits").items()) s.hits[std::stoi(k)] = v.get<double>();
  if (j.contains("queries")) s.queries = j["queries"].get<std::size_t>();
  return s;
}

}  // namespace

nlohmann::json to_json(const Metrics& metrics) {
  nlohmann::json j = stats_json(metrics);
  nlohmann::json sides = nlohmann::json::object();
  for (const auto& [name, s] : metrics.sides) sides[name] = stats_json(s);
  j["sides"] = sides;
  return j;
}

Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  static_cast<RankStats&>(m) = stats_from(j);
  if (j.contains("sides")) {
    for (const auto& [name, s] : j["sides"].items()) m.sides[name] = stats_from(s);
  }
  return m;
}

namespace {

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_metrics(const Metrics& metrics) {
  std::vector<const RankStats*> columns = {&metrics};
  std::vector<std::string> names = {"all"};
  for (const auto& [name, s] : metrics.sides) {
    columns.push_back(&s);
    names.push_back(name);
  }
  std::string out = pad_right("metric", 8);
  for (const auto& n : names) out += pad_left(n, 12);
  out += '\n';
  auto line = [&](const std::string& label, auto value) {
    out += pad_right(label, 8);
    for (const RankStats* s : columns) out += pad_left(value(*s), 12);
    out += '\n';
  };
  for (const auto& [k, v] : metrics.hits) {
    line("H@" + std::to_string(k),
         [k = k](const RankStats& s) { return fixed(100.0 * s.hits.at(k), 2); });
  }
  line("MR", [](const RankStats& s) { return fixed(s.mr, 1); });
  line("MRR", [](const RankStats& s) { return fixed(100.0 * s.mrr, 2); });
  line("queries", [](const RankStats& s) { return std::to_string(s.queries); });
  return out;
}

const MetricDelta& Comparison::at(std::string_view name) const {
  for (const auto& row : rows) {
    if (row.name == name) return row;
  }
  throw std::out_of_range("no metric " + std::string(name));
}

Comparison compare_runs(const RankStats& baseline, const RankStats& refined) {
  std::vector<int> base_k, ref_k;
  for (const auto& [k, v] : baseline.hits) base_k.push_back(k);
  for (const auto& [k, v] : refined.hits) ref_k.push_back(k);
  if (base_k != ref_k) throw ConfigError("metric sets differ in hits thresholds");

  Comparison cmp;
  auto add = [&](std::string name, double b, double r, bool higher_is_better) {
    MetricDelta row;
    row.name = std::move(name);
    row.baseline = b;
    row.refined = r;
    row.delta = r - b;
    row.higher_is_better = higher_is_better;
    row.improved = higher_is_better ? r > b : r < b;
    cmp.rows.push_back(std::move(row));
  };
  for (int k : base_k) {
    add("H@" + std::to_string(k), baseline.hits.at(k), refined.hits.at(k), true);
  }
  add("MR", baseline.mr, refined.mr, false);
  add("MRR", baseline.mrr, refined.mrr, true);
  return cmp;
}

nlohmann::json to_json(const Comparison& comparison) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : comparison.rows) {
    rows.push_back({{"metric", r.name},
                    {"baseline", r.baseline},
                    {"refined", r.refined},
                    {"delta", r.delta},
                    {"higher_is_better", r.higher_is_better},
                    {"improved", r.improved}});
  }
  return {{"rows", rows}};
}

std::string format_comparison(const Comparison& comparison,
                              std::string_view baseline_name,
                              std::string_view refined_name) {
  std::string out = pad_right("metric", 8) + pad_left(std::string(baseline_name), 14) +
                    pad_left(std::string(refined_name), 14) + pad_left("delta", 12) +
                    "  \n";
  for (const auto& r : comparison.rows) {
    const bool percent = r.name != "MR";
    const double scale = percent ? 100.0 : 1.0;
    const int precision = percent ? 2 : 1;
    const char* flag = r.delta == 0.0 ? "=" : (r.improved ? "improved" : "regressed");
    out += pad_right(r.name, 8) + pad_left(fixed(scale * r.baseline, precision), 14) +
           pad_left(fixed(scale * r.refined, precision), 14) +
           pad_left(fixed(scale * r.delta, precision), 12) + "  " + flag + '\n';
  }
  return out;
}

}  // namespace kgforge
