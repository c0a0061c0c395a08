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
#include <complex>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kgforge/checkpoint.h"
#include "kgforge/errors.h"
#include "kgforge/models.h"
#include "support/oracles.h"

using namespace kgforge;
using kgforge::testing::random_triple;
using kgforge::testing::unit_scale_params;

namespace {

using Vec = std::vector<double>;

void set_row(ModelParams& p, Table table, std::size_t id, const Vec& values) {
  auto row = p.row(table, id);
  REQUIRE(row.size() == values.size());
  std::copy(values.begin(), values.end(), row.begin());
}

Vec get_row(const ModelParams& p, Table table, std::size_t id) {
  const auto row = p.row(table, id);
  return {row.begin(), row.end()};
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const std::vector<Vec>& m, const Vec& v) {
  Vec out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

double neg_sq_dist(const Vec& h, const Vec& r, const Vec& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += (h[i] + r[i] - t[i]) * (h[i] + r[i] - t[i]);
  return -s;
}

// Textbook formulas with explicit matrices and std::complex.
double reference_score(const ModelParams& p, const Triple& tr) {
  const std::size_t d = p.dim;
  const Vec h = get_row(p, Table::kEntity, tr.head);
  const Vec t = get_row(p, Table::kEntity, tr.tail);
  const Vec r = get_row(p, Table::kRelation, tr.relation);
  switch (p.kind) {
    case ModelKind::kTransE:
      return neg_sq_dist(h, r, t);
    case ModelKind::kTransH: {
      const Vec w = get_row(p, Table::kRelationProjection, tr.relation);
      std::vector<Vec> proj(d, Vec(d));
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) proj[i][j] = (i == j ? 1.0 : 0.0) - w[i] * w[j];
      }
      return neg_sq_dist(matvec(proj, h), r, matvec(proj, t));
    }
    case ModelKind::kTransD: {
      const Vec wr = get_row(p, Table::kRelationProjection, tr.relation);
      const auto matrix = [&](const Vec& we) {
        std::vector<Vec> m(d, Vec(d));
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) m[i][j] = wr[i] * we[j] + (i == j ? 1.0 : 0.0);
        }
        return m;
      };
      const Vec wh = get_row(p, Table::kEntityProjection, tr.head);
      const Vec wt = get_row(p, Table::kEntityProjection, tr.tail);
      return neg_sq_dist(matvec(matrix(wh), h), r, matvec(matrix(wt), t));
    }
    case ModelKind::kTransR: {
      const Vec flat = get_row(p, Table::kRelationMatrix, tr.relation);
      std::vector<Vec> m(d, Vec(d));
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) m[i][j] = flat[i * d + j];
      }
      return neg_sq_dist(matvec(m, h), r, matvec(m, t));
    }
    case ModelKind::kRotatE: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const std::complex<double> hc(h[i], h[d + i]), tc(t[i], t[d + i]);
        s += std::abs(hc * std::polar(1.0, r[i]) - tc);
      }
      return -s;
    }
  }
  return 0.0;
}

std::vector<Vec> random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<Vec> q;
  while (q.size() < d) {
    Vec v(d);
    for (double& x : v) x = n(rng);
    for (const Vec& b : q) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-6) continue;
    for (double& x : v) x /= norm;
    q.push_back(v);
  }
  return q;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("model names") {
  for (ModelKind kind : kAllModels) CHECK(parse_model(model_name(kind)) == kind);
  CHECK(parse_model("TransE") == ModelKind::kTransE);
  CHECK(parse_model("RotatE") == ModelKind::kRotatE);
  CHECK_THROWS_AS(parse_model("distmult"), ConfigError);
}

TEST_CASE("initialization is seeded and bounded") {
  for (ModelKind kind : kAllModels) {
    CAPTURE(model_name(kind));
    const ModelParams a = init_params(kind, 30, 5, 200, 9);
    const ModelParams b = init_params(kind, 30, 5, 200, 9);
    CHECK(a == b);
    CHECK_FALSE(a == init_params(kind, 30, 5, 200, 10));
    const double bound = 6.0 / std::sqrt(200.0);
    CHECK(bound == doctest::Approx(0.4243).epsilon(1e-4));
    for (double v : a.entity) CHECK(std::abs(v) <= bound);
    if (kind == ModelKind::kRotatE) {
      for (double v : a.relation) {
        CHECK(v >= 0.0);
        CHECK(v < 2.0 * std::numbers::pi);
      }
      CHECK(a.entity.size() == 30 * 400);
    } else {
      for (double v : a.relation) CHECK(std::abs(v) <= bound);
    }
  }
  const ModelParams h = init_params(ModelKind::kTransH, 3, 7, 200, 2);
  for (std::size_t r = 0; r < 7; ++r) {
    CHECK(std::abs(norm(h.row(Table::kRelationProjection, r)) - 1.0) <= 1e-9);
  }
  const ModelParams m = init_params(ModelKind::kTransR, 3, 2, 4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m.row(Table::kRelationMatrix, 1)[i * 4 + j] == (i == j ? 1.0 : 0.0));
    }
  }
  CHECK(m.rows(Table::kEntityProjection) == 0);
  CHECK_THROWS_AS(init_params(ModelKind::kTransE, 0, 1, 4, 1), ConfigError);
  CHECK_THROWS_AS(init_params(ModelKind::kTransE, 1, 0, 4, 1), ConfigError);
  CHECK_THROWS_AS(init_params(ModelKind::kTransE, 1, 1, 0, 1), ConfigError);
}

TEST_CASE("worked score examples") {
  SUBCASE("exact TransE translation") {
    ModelParams p = init_params(ModelKind::kTransE, 2, 1, 2, 1);
    set_row(p, Table::kEntity, 0, {1, 0});
    set_row(p, Table::kRelation, 0, {0, 1});
    set_row(p, Table::kEntity, 1, {1, 1});
    CHECK(score(p, {0, 0, 1}) == 0.0);
  }
  SUBCASE("TransE arithmetic") {
    ModelParams p = init_params(ModelKind::kTransE, 2, 1, 2, 1);
    set_row(p, Table::kEntity, 0, {1, 2});
    set_row(p, Table::kRelation, 0, {3, 4});
    set_row(p, Table::kEntity, 1, {0, 0});
    CHECK(score(p, {0, 0, 1}) == -52.0);
  }
  SUBCASE("TransH projection") {
    ModelParams p = init_params(ModelKind::kTransH, 2, 1, 2, 1);
    set_row(p, Table::kRelationProjection, 0, {0, 1});
    set_row(p, Table::kEntity, 0, {2, 3});
    set_row(p, Table::kRelation, 0, {1, 0});
    set_row(p, Table::kEntity, 1, {3, 5});
    CHECK(score(p, {0, 0, 1}) == 0.0);
    std::vector<double> out(2);
    project_entity(p, 0, 0, out);
    CHECK(out == Vec{2, 0});
    project_entity(p, 1, 0, out);
    CHECK(out == Vec{3, 0});
  }
  SUBCASE("RotatE identity rotation") {
    ModelParams p = init_params(ModelKind::kRotatE, 2, 1, 1, 1);
    set_row(p, Table::kEntity, 0, {1, 0});
    set_row(p, Table::kEntity, 1, {1, 0});
    set_row(p, Table::kRelation, 0, {0});
    CHECK(score(p, {0, 0, 1}) == 0.0);
  }
  SUBCASE("RotatE quarter turn") {
    ModelParams p = init_params(ModelKind::kRotatE, 2, 1, 1, 1);
    set_row(p, Table::kEntity, 0, {1, 0});
    set_row(p, Table::kEntity, 1, {0, 1});
    set_row(p, Table::kRelation, 0, {std::numbers::pi / 2});
    CHECK(score(p, {0, 0, 1}) == doctest::Approx(0.0));
    set_row(p, Table::kEntity, 1, {0, -1});
    CHECK(score(p, {0, 0, 1}) == doctest::Approx(-2.0));
  }
  SUBCASE("TransR with identity matches TransE") {
    ModelParams r = init_params(ModelKind::kTransR, 2, 1, 2, 1);
    ModelParams e = init_params(ModelKind::kTransE, 2, 1, 2, 1);
    for (ModelParams* p : {&r, &e}) {
      set_row(*p, Table::kEntity, 0, {1, 2});
      set_row(*p, Table::kRelation, 0, {3, 4});
      set_row(*p, Table::kEntity, 1, {0, 0});
    }
    CHECK(score(r, {0, 0, 1}) == score(e, {0, 0, 1}));
  }
  SUBCASE("invalid ids") {
    const ModelParams p = init_params(ModelKind::kTransE, 2, 1, 2, 1);
    CHECK_THROWS_AS(score(p, {0, 1, 1}), std::out_of_range);
    CHECK_THROWS_AS(score(p, {2, 0, 1}), std::out_of_range);
    CHECK_THROWS_AS(score(p, {0, 0, -1}), std::out_of_range);
  }
}

TEST_CASE("scores match the matrix formulas and are never positive") {
  std::mt19937_64 rng(17);
  for (ModelKind kind : kAllModels) {
    CAPTURE(model_name(kind));
    for (std::size_t d : {1u, 3u, 8u}) {
      const ModelParams p = unit_scale_params(kind, 20, 4, d, 3 + d);
      for (int i = 0; i < 200; ++i) {
        const Triple t = random_triple(rng, p);
        const double s = score(p, t);
        CHECK(s <= 0.0);
        CHECK(s == doctest::Approx(reference_score(p, t)).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("projection models reduce to TransE") {
  std::mt19937_64 rng(23);
  const std::size_t d = 8;
  const ModelParams base = unit_scale_params(ModelKind::kTransE, 50, 5, d, 4);

  ModelParams transd = init_params(ModelKind::kTransD, 50, 5, d, 4);
  transd.entity = base.entity;
  transd.relation = base.relation;
  std::fill(transd.entity_projection.begin(), transd.entity_projection.end(), 0.0);

  ModelParams transr = init_params(ModelKind::kTransR, 50, 5, d, 4);
  transr.entity = base.entity;
  transr.relation = base.relation;

  // With a normal orthogonal to every entity, TransH projection is the identity.
  ModelParams transh_base = base;
  for (std::size_t e = 0; e < 50; ++e) transh_base.row(Table::kEntity, e)[d - 1] = 0.0;
  ModelParams transh = init_params(ModelKind::kTransH, 50, 5, d, 4);
  transh.entity = transh_base.entity;
  transh.relation = transh_base.relation;
  for (std::size_t r = 0; r < 5; ++r) {
    Vec w(d, 0.0);
    w[d - 1] = 1.0;
    set_row(transh, Table::kRelationProjection, r, w);
  }

  for (int i = 0; i < 1000; ++i) {
    const Triple t = random_triple(rng, base);
    CHECK(std::abs(score(transd, t) - score(base, t)) <= 1e-12);
    CHECK(std::abs(score(transr, t) - score(base, t)) <= 1e-12);
    CHECK(std::abs(score(transh, t) - score(transh_base, t)) <= 1e-12);
  }
}

TEST_CASE("TransE is invariant under an orthogonal transform") {
  std::mt19937_64 rng(29);
  const std::size_t d = 8;
  const ModelParams p = unit_scale_params(ModelKind::kTransE, 30, 4, d, 5);
  const auto q = random_orthogonal(d, rng);
  ModelParams rotated = p;
  for (Table table : {Table::kEntity, Table::kRelation}) {
    for (std::size_t id = 0; id < p.rows(table); ++id) {
      set_row(rotated, table, id, matvec(q, get_row(p, table, id)));
    }
  }
  for (int i = 0; i < 500; ++i) {
    const Triple t = random_triple(rng, p);
    CHECK(score(rotated, t) == doctest::Approx(score(p, t)).epsilon(1e-10));
  }
}

TEST_CASE("worked gradient examples") {
  ModelParams p = init_params(ModelKind::kTransE, 2, 1, 1, 1);
  set_row(p, Table::kEntity, 0, {1});
  set_row(p, Table::kRelation, 0, {1});
  set_row(p, Table::kEntity, 1, {0});
  SparseGradient g = score_gradients(p, {0, 0, 1});
  CHECK(g.row(Table::kEntity, 0)[0] == -4.0);
  CHECK(g.row(Table::kRelation, 0)[0] == -4.0);
  CHECK(g.row(Table::kEntity, 1)[0] == 4.0);

  set_row(p, Table::kEntity, 1, {2});
  g = score_gradients(p, {0, 0, 1});
  for (Table table : {Table::kEntity, Table::kRelation}) {
    for (std::int32_t id : g.touched(table)) {
      for (double v : g.row(table, id)) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("sparse gradients accumulate by row") {
  const ModelParams p = init_params(ModelKind::kTransE, 5, 2, 3, 1);
  SparseGradient g(p);
  CHECK(g.empty());
  const Vec ones(3, 1.0);
  g.add(Table::kEntity, 4, ones, 2.0);
  g.add(Table::kEntity, 1, ones, 1.0);
  g.add(Table::kEntity, 4, ones, -0.5);
  CHECK_FALSE(g.empty());
  const auto touched = g.touched(Table::kEntity);
  CHECK(std::vector<std::int32_t>(touched.begin(), touched.end()) ==
        std::vector<std::int32_t>{4, 1});
  CHECK(g.row(Table::kEntity, 4)[2] == 1.5);
  CHECK(g.row(Table::kEntity, 0).empty());
  g.clear();
  CHECK(g.empty());
  CHECK(g.touched(Table::kEntity).empty());
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(42);
  for (ModelKind kind : kAllModels) {
    for (std::size_t d : {4u, 8u}) {
      CAPTURE(model_name(kind));
      CAPTURE(d);
      const ModelParams p = unit_scale_params(kind, 40, 6, d, 42 + d);
      double worst = 0.0;
      std::string where;
      for (int i = 0; i < 100; ++i) {
        const auto check = kgforge::testing::check_gradient(p, random_triple(rng, p));
        CHECK(check.components > 0);
        if (check.max_relative_error > worst) {
          worst = check.max_relative_error;
          where = check.worst;
        }
      }
      CAPTURE(where);
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("gradient scale multiplies every component") {
  const ModelParams p = unit_scale_params(ModelKind::kTransD, 10, 2, 4, 8);
  const Triple t{1, 1, 2};
  const SparseGradient once = score_gradients(p, t);
  SparseGradient scaled(p);
  add_score_gradient(p, t, -3.0, scaled);
  for (Table table : kAllTables) {
    for (std::int32_t id : once.touched(table)) {
      const auto a = once.row(table, id);
      const auto b = scaled.row(table, id);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(-3.0 * a[i]));
    }
  }
}

TEST_CASE("constraint examples") {
  ModelParams p = init_params(ModelKind::kTransE, 2, 1, 2, 1);
  set_row(p, Table::kEntity, 0, {3, 4});
  set_row(p, Table::kEntity, 1, {0.3, 0.4});
  apply_constraints(p);
  CHECK(get_row(p, Table::kEntity, 0)[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(get_row(p, Table::kEntity, 0)[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(get_row(p, Table::kEntity, 1) == Vec{0.3, 0.4});

  ModelParams r = init_params(ModelKind::kRotatE, 2, 2, 2, 1);
  set_row(r, Table::kRelation, 0, {-0.5, 7.0});
  apply_constraints(r);
  const Vec phases = get_row(r, Table::kRelation, 0);
  CHECK(phases[0] == doctest::Approx(2 * std::numbers::pi - 0.5));
  CHECK(phases[1] == doctest::Approx(7.0 - 2 * std::numbers::pi));
}

TEST_CASE("constraints are idempotent and cap entity norms") {
  for (ModelKind kind : kAllModels) {
    CAPTURE(model_name(kind));
    ModelParams p = unit_scale_params(kind, 60, 6, 8, 31);
    for (double& v : p.entity) v *= 3.0;
    if (kind == ModelKind::kRotatE) {
      for (double& v : p.relation) v *= 10.0;
    }
    apply_constraints(p);
    const ModelParams once = p;
    apply_constraints(p);
    CHECK(p == once);
    if (kind != ModelKind::kRotatE) {
      for (std::size_t e = 0; e < p.num_entities; ++e) {
        CHECK(norm(p.row(Table::kEntity, e)) <= 1.0 + 1e-12);
      }
    } else {
      for (double v : p.relation) {
        CHECK(v >= 0.0);
        CHECK(v < 2 * std::numbers::pi);
      }
    }
    if (kind == ModelKind::kTransH) {
      for (std::size_t r = 0; r < p.num_relations; ++r) {
        CHECK(std::abs(norm(p.row(Table::kRelationProjection, r)) - 1.0) <= 1e-9);
      }
    }
    if (kind == ModelKind::kTransD) {
      for (std::size_t e = 0; e < p.num_entities; ++e) {
        CHECK(norm(p.row(Table::kEntityProjection, e)) <= 1.0 + 1e-12);
      }
      for (std::size_t r = 0; r < p.num_relations; ++r) {
        CHECK(norm(p.row(Table::kRelationProjection, r)) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("row-restricted constraints touch only the listed rows") {
  ModelParams p = unit_scale_params(ModelKind::kTransH, 10, 3, 4, 2);
  for (double& v : p.entity) v *= 5.0;
  const ModelParams before = p;
  const std::vector<std::int32_t> entities = {2, 7};
  const std::vector<std::int32_t> relations = {1};
  apply_constraints(p, entities, relations);
  for (std::size_t e = 0; e < 10; ++e) {
    if (e == 2 || e == 7) {
      CHECK(norm(p.row(Table::kEntity, e)) <= 1.0 + 1e-12);
    } else {
      CHECK(get_row(p, Table::kEntity, e) == get_row(before, Table::kEntity, e));
    }
  }
  CHECK(std::abs(norm(p.row(Table::kRelationProjection, 1)) - 1.0) <= 1e-12);
  CHECK(get_row(p, Table::kRelationProjection, 0) ==
        get_row(before, Table::kRelationProjection, 0));
}

TEST_CASE("checkpoints round trip exactly") {
  for (ModelKind kind : kAllModels) {
    CAPTURE(model_name(kind));
    Checkpoint ck{unit_scale_params(kind, 13, 3, 5, 77), {{"note", "x"}}};
    std::stringstream buf;
    write_checkpoint(buf, ck);
    const Checkpoint back = read_checkpoint(buf);
    CHECK(back.params == ck.params);
    CHECK(back.metadata == ck.metadata);
  }
}

TEST_CASE("checkpoint tables are little-endian doubles after a JSON line") {
  Checkpoint ck{init_params(ModelKind::kTransE, 2, 1, 2, 1), {}};
  set_row(ck.params, Table::kEntity, 0, {1.5, -2.0});
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const std::string bytes = buf.str();
  const auto newline = bytes.find('\n');
  REQUIRE(newline != std::string::npos);
  const auto header = nlohmann::json::parse(bytes.substr(0, newline));
  CHECK(header.at("model") == "transe");
  CHECK(header.at("entities") == 2);
  CHECK(header.at("relations") == 1);
  CHECK(header.at("dim") == 2);
  CHECK(bytes.size() == newline + 1 + 8 * (4 + 2));
  // 1.5 is 0x3FF8000000000000.
  const unsigned char expected[8] = {0, 0, 0, 0, 0, 0, 0xF8, 0x3F};
  CHECK(std::memcmp(bytes.data() + newline + 1, expected, 8) == 0);
}

TEST_CASE("bad checkpoints are rejected") {
  Checkpoint ck{init_params(ModelKind::kTransR, 4, 2, 3, 1), {}};
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const std::string bytes = buf.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(truncated), CheckpointError);
  std::stringstream garbage("not json\n");
  CHECK_THROWS_AS(read_checkpoint(garbage), CheckpointError);
  std::stringstream empty;
  CHECK_THROWS_AS(read_checkpoint(empty), CheckpointError);

  auto header = nlohmann::json::parse(bytes.substr(0, bytes.find('\n')));
  header["format"] = "other";
  std::stringstream wrong(header.dump() + "\n" + bytes.substr(bytes.find('\n') + 1));
  CHECK_THROWS_AS(read_checkpoint(wrong), CheckpointError);

  validate_checkpoint(ck.params, DatasetStats{4, 2, 0, 0, 0});
  CHECK_THROWS_AS(validate_checkpoint(ck.params, DatasetStats{5, 2, 0, 0, 0}),
                  CheckpointError);
  CHECK_THROWS_AS(validate_checkpoint(ck.params, DatasetStats{4, 3, 0, 0, 0}),
                  CheckpointError);
}
