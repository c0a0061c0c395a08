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


#include <cmath>
#include <random>

#include "doctest.h"
#include "kgforge/errors.h"
#include "kgforge/evaluator.h"
#include "kgforge/models.h"
#include "kgforge/triple_index.h"
#include "support/oracles.h"
#include "support/synthetic.h"

using namespace kgforge;
using kgforge::testing::brute_force_rank;

namespace {

// TransE in one dimension: entity i sits at position[i].
ModelParams line_model(const std::vector<double>& positions, const std::vector<double>& shifts) {
  ModelParams p = init_params(ModelKind::kTransE, positions.size(), shifts.size(), 1, 1);
  p.entity = positions;
  p.relation = shifts;
  return p;
}

RankStats stats(double h10, double mr, double mrr) {
  RankStats s;
  s.hits[10] = h10 / 100.0;
  s.mr = mr;
  s.mrr = mrr / 100.0;
  return s;
}

void check_metric_invariants(const RankStats& s, std::size_t candidates) {
  CHECK(s.mr >= 1.0);
  CHECK(s.mr <= static_cast<double>(candidates));
  CHECK(s.mrr > 0.0);
  CHECK(s.mrr <= 1.0);
  double previous = 0.0;
  for (const auto& [k, v] : s.hits) {
    CHECK(v >= previous);
    CHECK(v <= 1.0);
    previous = v;
  }
}

}  // namespace

TEST_CASE("aggregating ranks 1, 2 and 4") {
  const std::vector<std::size_t> ranks = {1, 2, 4};
  const std::vector<int> hits = {1, 3, 10};
  const RankStats s = summarize_ranks(ranks, hits);
  CHECK(s.mr == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(s.mrr == doctest::Approx(0.58333333333333333).epsilon(1e-15));
  CHECK(s.hits.at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.hits.at(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.hits.at(10) == 1.0);
  CHECK(s.queries == 3);
}

TEST_CASE("rank histograms are order independent") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(1, 500);
  std::vector<std::size_t> ranks(5000);
  for (auto& r : ranks) r = pick(rng);
  const std::vector<int> hits = {1, 3, 10, 100};

  RankHistogram forward;
  for (std::size_t r : ranks) forward.add(r);
  RankHistogram parts[3];
  for (std::size_t i = 0; i < ranks.size(); ++i) parts[i % 3].add(ranks[ranks.size() - 1 - i]);
  RankHistogram merged;
  merged.merge(parts[2]);
  merged.merge(parts[0]);
  merged.merge(parts[1]);
  CHECK(merged.count() == ranks.size());
  CHECK(forward.summarize(hits) == merged.summarize(hits));

  double mrr = 0.0;
  for (std::size_t r : ranks) mrr += 1.0 / static_cast<double>(r);
  CHECK(forward.summarize(hits).mrr == doctest::Approx(mrr / 5000.0).epsilon(1e-12));
}

TEST_CASE("config parsing and validation") {
  CHECK(parse_sides("head") == Sides::kHead);
  CHECK(parse_sides("tail") == Sides::kTail);
  CHECK(parse_sides("both") == Sides::kBoth);
  CHECK(sides_name(Sides::kBoth) == "both");
  CHECK_THROWS_AS(parse_sides("left"), ConfigError);
  CHECK(parse_candidate_policy("all") == CandidatePolicy::kAllEntities);
  CHECK(parse_candidate_policy("exclude-auxiliary") == CandidatePolicy::kExcludeAuxiliary);

  EvalConfig c;
  CHECK(c.filtered);
  CHECK(c.sides == Sides::kBoth);
  CHECK(c.candidates == CandidatePolicy::kAllEntities);
  CHECK(c.hits == std::vector<int>{1, 3, 10});
  c.validate();
  c.hits = {10, 1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.hits = {0, 1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("the best scoring true entity ranks first") {
  const ModelParams p = line_model({0.0, 1.0, 5.0, 9.0}, {1.0});
  EvalConfig c;
  c.filtered = false;
  CHECK(rank_candidates(p, {0, 0, 1}, Side::kTail, nullptr, c) == 1);
  CHECK(rank_candidates(p, {0, 0, 1}, Side::kHead, nullptr, c) == 1);
  // Entities 0 and 1 are both closer to 0 + 1 than the true tail 2.
  CHECK(rank_candidates(p, {0, 0, 2}, Side::kTail, nullptr, c) == 3);
}

TEST_CASE("ties do not worsen the rank") {
  // Tails 1 and 2 sit at the same distance from 0 + 1 as the true tail 3.
  const ModelParams p = line_model({0.0, 0.0, 2.0, 2.0}, {1.0});
  EvalConfig c;
  c.filtered = false;
  CHECK(rank_candidates(p, {0, 0, 3}, Side::kTail, nullptr, c) == 1);
  CHECK(rank_candidates(p, {0, 0, 1}, Side::kTail, nullptr, c) == 1);
}

TEST_CASE("filtering removes other known answers") {
  const ModelParams p = line_model({0.0, 1.0, 1.1, 3.0}, {1.0});
  const std::vector<Triple> known = {{0, 0, 1}, {0, 0, 2}};
  const TripleIndex filter({std::span<const Triple>(known)});
  EvalConfig c;
  CHECK(rank_candidates(p, {0, 0, 2}, Side::kTail, &filter, c) == 1);
  c.filtered = false;
  CHECK(rank_candidates(p, {0, 0, 2}, Side::kTail, nullptr, c) == 2);
}

TEST_CASE("three entity graph matches exhaustive enumeration") {
  ModelParams p = init_params(ModelKind::kTransE, 3, 2, 2, 1);
  p.entity = {0.0, 0.0, 1.0, 0.0, 0.5, 0.9};
  p.relation = {1.0, 0.0, -0.4, 0.7};
  const std::vector<Triple> train = {{0, 0, 1}, {1, 1, 2}};
  const std::vector<Triple> test = {{0, 1, 2}, {2, 0, 1}, {1, 0, 0}};
  const TripleIndex filter({std::span<const Triple>(train), std::span<const Triple>(test)});
  const std::vector<std::span<const Triple>> known = {train, test};
  for (bool filtered : {false, true}) {
    EvalConfig c;
    c.filtered = filtered;
    for (const Triple& t : test) {
      for (Side side : {Side::kHead, Side::kTail}) {
        CHECK(rank_candidates(p, t, side, filtered ? &filter : nullptr, c) ==
              brute_force_rank(p, t, side, known, filtered));
      }
    }
  }
}

TEST_CASE("optimized ranking equals brute force on small random graphs") {
  std::mt19937_64 rng(101);
  int dataset_index = 0;
  for (ModelKind kind : kAllModels) {
    for (int round = 0; round < 4; ++round, ++dataset_index) {
      CAPTURE(model_name(kind));
      CAPTURE(round);
      const std::size_t entities = 10 + 10 * static_cast<std::size_t>(round);
      const Dataset ds = kgforge::testing::random_dataset(rng, entities, 3, 150, 20, 40);
      ModelParams p = init_params(kind, entities, 3, 6, 50 + dataset_index);
      const TripleIndex filter = build_index(ds);
      const std::vector<std::span<const Triple>> known = {ds.train, ds.valid, ds.test};
      std::vector<bool> aux(entities, false);
      for (std::size_t e = 0; e < entities; e += 4) aux[e] = true;

      for (bool filtered : {false, true}) {
        EvalConfig c;
        c.filtered = filtered;
        for (const Triple& t : ds.test) {
          for (Side side : {Side::kHead, Side::kTail}) {
            const std::size_t rank = rank_candidates(p, t, side, &filter, c);
            REQUIRE(rank == brute_force_rank(p, t, side, known, filtered));
            if (filtered) {
              EvalConfig raw = c;
              raw.filtered = false;
              CHECK(rank <= rank_candidates(p, t, side, nullptr, raw));
            }
          }
        }
        // Excluding auxiliary candidates.
        EvalConfig ex = c;
        ex.candidates = CandidatePolicy::kExcludeAuxiliary;
        ex.auxiliary = aux;
        for (const Triple& t : ds.test) {
          for (Side side : {Side::kHead, Side::kTail}) {
            const EntityId truth = side == Side::kHead ? t.head : t.tail;
            if (aux[static_cast<std::size_t>(truth)]) continue;
            const std::size_t rank = rank_candidates(p, t, side, &filter, ex);
            REQUIRE(rank == brute_force_rank(p, t, side, known, filtered, aux));
            CHECK(rank <= rank_candidates(p, t, side, &filter, c));
          }
        }
      }
    }
  }
}

TEST_CASE("an excluded true entity is an internal error") {
  const ModelParams p = line_model({0.0, 1.0, 2.0}, {1.0});
  EvalConfig c;
  c.filtered = false;
  c.candidates = CandidatePolicy::kExcludeAuxiliary;
  c.auxiliary = {false, true, false};
  CHECK_THROWS_AS(rank_candidates(p, {0, 0, 1}, Side::kTail, nullptr, c), std::logic_error);
}

TEST_CASE("oracle parameters give perfect metrics") {
  std::vector<double> positions;
  for (int i = 0; i < 12; ++i) positions.push_back(i);
  const ModelParams p = line_model(positions, {1.0});
  std::vector<Triple> test;
  for (int i = 0; i + 1 < 12; ++i) test.push_back({i, 0, i + 1});
  const TripleIndex filter({std::span<const Triple>(test)});
  const Metrics m = evaluate(p, test, &filter, EvalConfig{});
  CHECK(m.mr == 1.0);
  CHECK(m.mrr == 1.0);
  CHECK(m.hits.at(1) == 1.0);
  CHECK(m.queries == 22);
  CHECK(m.sides.at("head").queries == 11);
  CHECK(m.sides.at("tail").mrr == 1.0);
}

TEST_CASE("random parameters give uniform raw ranks") {
  const std::size_t n = 50;
  const ModelParams p = init_params(ModelKind::kTransE, n, 5, 16, 123);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> e(0, 49), r(0, 4);
  std::vector<Triple> queries(1000);
  for (auto& q : queries) q = {e(rng), r(rng), e(rng)};
  EvalConfig c;
  c.filtered = false;
  c.sides = Sides::kTail;
  const Metrics m = evaluate(p, queries, nullptr, c);
  CHECK(m.queries == 1000);
  const double expected = (n + 1) / 2.0;
  const double sigma = std::sqrt((n * n - 1) / 12.0 / 1000.0);
  CHECK(std::abs(m.mr - expected) <= 3.0 * sigma);
  CHECK_FALSE(m.sides.contains("head"));
}

TEST_CASE("evaluation is read-only and thread-count independent") {
  std::mt19937_64 rng(9);
  const Dataset ds = kgforge::testing::random_dataset(rng, 120, 6, 1500, 100, 300);
  const TripleIndex filter = build_index(ds);
  for (ModelKind kind : kAllModels) {
    CAPTURE(model_name(kind));
    const ModelParams p = init_params(kind, 120, 6, 10, 3);
    const ModelParams copy = p;
    EvalConfig serial;
    const Metrics a = evaluate(p, ds.test, &filter, serial);
    EvalConfig parallel = serial;
    parallel.threads = 4;
    const Metrics b = evaluate(p, ds.test, &filter, parallel);
    CHECK(a == b);
    CHECK(p == copy);
    check_metric_invariants(a, 120);
    for (const auto& [name, s] : a.sides) check_metric_invariants(s, 120);
    CHECK(a.queries == 600);
  }
  const ModelParams p = init_params(ModelKind::kTransE, 120, 6, 10, 3);
  CHECK_THROWS_AS(evaluate(p, ds.test, nullptr, EvalConfig{}), ConfigError);
}

TEST_CASE("metrics json round trip") {
  const ModelParams p = line_model({0.0, 1.0, 2.0, 3.5}, {1.0});
  const std::vector<Triple> test = {{0, 0, 1}, {1, 0, 3}};
  const TripleIndex filter({std::span<const Triple>(test)});
  const Metrics m = evaluate(p, test, &filter, EvalConfig{});
  const auto j = to_json(m);
  for (const char* key : {"mr", "mrr", "hits", "queries", "sides"}) CHECK(j.contains(key));
  CHECK(j.at("hits").contains("10"));
  CHECK(j.at("sides").contains("head"));
  CHECK(metrics_from_json(j) == m);
  CHECK(metrics_from_json(nlohmann::json::parse(j.dump())) == m);

  const std::string table = format_metrics(m);
  CHECK(table.find("H@10") != std::string::npos);
  CHECK(table.find("MRR") != std::string::npos);
  CHECK(table.find("100.00") != std::string::npos);
}

TEST_CASE("comparison of published TransE results on WN18RR") {
  const Comparison cmp = compare_runs(stats(50.1, 3384, 22.6), stats(53.7, 1125, 22.2));
  CHECK(cmp.rows.size() == 3);
  CHECK(cmp.rows[0].name == "H@10");
  CHECK(cmp.rows[1].name == "MR");
  CHECK(cmp.rows[2].name == "MRR");
  CHECK(cmp.at("H@10").improved);
  CHECK(cmp.at("MR").improved);
  CHECK_FALSE(cmp.at("MRR").improved);
  CHECK(cmp.at("MR").delta == -2259.0);
  const std::string text = format_comparison(cmp);
  CHECK(text.find("regressed") != std::string::npos);
}

TEST_CASE("comparison of published TransH results on FB15k237") {
  const Comparison cmp = compare_runs(stats(36.6, 311, 21.1), stats(48.9, 221, 30.2));
  for (const auto& row : cmp.rows) CHECK(row.improved);
  CHECK(cmp.at("H@10").delta == doctest::Approx(0.123));
  const auto j = to_json(cmp);
  CHECK(j.at("rows").size() == 3);
  CHECK(j.at("rows")[1].at("metric") == "MR");
  CHECK(j.at("rows")[1].at("higher_is_better") == false);
}

TEST_CASE("comparing identical runs") {
  const Comparison cmp = compare_runs(stats(40, 200, 25), stats(40, 200, 25));
  for (const auto& row : cmp.rows) {
    CHECK(row.delta == 0.0);
    CHECK_FALSE(row.improved);
  }
  CHECK(format_comparison(cmp).find("improved") == std::string::npos);
  RankStats other = stats(40, 200, 25);
  other.hits[1] = 0.1;
  CHECK_THROWS_AS(compare_runs(stats(40, 200, 25), other), ConfigError);
  CHECK_THROWS_AS(cmp.at("H@3"), std::out_of_range);
}
