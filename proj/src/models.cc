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


#include "kgforge/models.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "kgforge/errors.h"

namespace kgforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Slack for the norm constraints so that a renormalized row is left alone on
// the next pass.
constexpr double kNormSlack = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_triple(const ModelParams& p, const Triple& t) {
  const auto ne = static_cast<std::int64_t>(p.num_entities);
  const auto nr = static_cast<std::int64_t>(p.num_relations);
  if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne ||
      t.relation < 0 || t.relation >= nr) {
    throw std::out_of_range("triple id outside model tables");
  }
}

// Per-thread work buffers for the scoring and gradient kernels.
struct Scratch {
  std::vector<double> a, b, c, d, e, f;
  void resize(std::size_t n) {
    for (auto* v : {&a, &b, &c, &d, &e, &f}) v->assign(n, 0.0);
  }
};

Scratch& scratch(std::size_t n) {
  thread_local Scratch s;
  s.resize(n);
  return s;
}

double rotate_score(const ModelParams& p, const Triple& t) {
  const std::size_t d = p.dim;
  auto h = p.row(Table::kEntity, static_cast<std::size_t>(t.head));
  auto tl = p.row(Table::kEntity, static_cast<std::size_t>(t.tail));
  auto phase = p.row(Table::kRelation, static_cast<std::size_t>(t.relation));
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double c = std::cos(phase[i]);
    const double s = std::sin(phase[i]);
    const double qr = h[i] * c - h[d + i] * s;
    const double qi = h[i] * s + h[d + i] * c;
    const double dr = qr - tl[i];
    const double di = qi - tl[d + i];
    sum += std::sqrt(dr * dr + di * di);
  }
  return -sum;
}

void normalize_if_longer(std::span<double> v) {
  const double n2 = dot(v, v);
  if (n2 > 1.0 + kNormSlack) {
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
  }
}

void normalize_to_unit(std::span<double> v) {
  const double n2 = dot(v, v);
  if (std::abs(n2 - 1.0) <= kNormSlack) return;
  if (n2 == 0.0) {
    v[0] = 1.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
}

double wrap_phase(double theta) {
  if (theta >= 0.0 && theta < kTwoPi) return theta;
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

void constrain_entity(ModelParams& p, std::size_t e) {
  if (p.kind == ModelKind::kRotatE) return;
  normalize_if_longer(p.row(Table::kEntity, e));
  if (p.kind == ModelKind::kTransD) normalize_if_longer(p.row(Table::kEntityProjection, e));
}

void constrain_relation(ModelParams& p, std::size_t r) {
  if (p.kind == ModelKind::kTransH) {
    normalize_to_unit(p.row(Table::kRelationProjection, r));
  } else if (p.kind == ModelKind::kTransD) {
    normalize_if_longer(p.row(Table::kRelationProjection, r));
  } else if (p.kind == ModelKind::kRotatE) {
    for (double& theta : p.row(Table::kRelation, r)) theta = wrap_phase(theta);
  }
}

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTransE: return "transe";
    case ModelKind::kTransH: return "transh";
    case ModelKind::kTransD: return "transd";
    case ModelKind::kTransR: return "transr";
    case ModelKind::kRotatE: return "rotate";
  }
  return "transe";
}

ModelKind parse_model(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (ModelKind kind : kAllModels) {
    if (model_name(kind) == lower) return kind;
  }
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected transe, transh, transd, transr or rotate)");
}

std::string_view table_name(Table table) {
  switch (table) {
    case Table::kEntity: return "entity";
    case Table::kRelation: return "relation";
    case Table::kEntityProjection: return "entity_projection";
    case Table::kRelationProjection: return "relation_projection";
    case Table::kRelationMatrix: return "relation_matrix";
  }
  return "entity";
}

std::size_t ModelParams::rows(Table table) const {
  switch (table) {
    case Table::kEntity: return num_entities;
    case Table::kRelation: return num_relations;
    case Table::kEntityProjection:
      return kind == ModelKind::kTransD ? num_entities : 0;
    case Table::kRelationProjection:
      return kind == ModelKind::kTransH || kind == ModelKind::kTransD
                 ? num_relations
                 : 0;
    case Table::kRelationMatrix:
      return kind == ModelKind::kTransR ? num_relations : 0;
  }
  return 0;
}

std::size_t ModelParams::width(Table table) const {
  switch (table) {
    case Table::kEntity: return kind == ModelKind::kRotatE ? 2 * dim : dim;
    case Table::kRelationMatrix: return dim * dim;
    default: return dim;
  }
}

std::vector<double>& ModelParams::data(Table table) {
  switch (table) {
    case Table::kEntity: return entity;
    case Table::kRelation: return relation;
    case Table::kEntityProjection: return entity_projection;
    case Table::kRelationProjection: return relation_projection;
    case Table::kRelationMatrix: return relation_matrix;
  }
  return entity;
}

const std::vector<double>& ModelParams::data(Table table) const {
  return const_cast<ModelParams*>(this)->data(table);
}

ModelParams init_params(ModelKind kind, std::size_t num_entities,
                        std::size_t num_relations, std::size_t dim,
                        std::uint64_t seed) {
  if (num_entities == 0 || num_relations == 0) {
    throw ConfigError("model needs at least one entity and one relation");
  }
  if (dim == 0) throw ConfigError("embedding dimension must be >= 1");

  ModelParams p;
  p.kind = kind;
  p.num_entities = num_entities;
  p.num_relations = num_relations;
  p.dim = dim;
  p.seed = seed;

  std::mt19937_64 rng(seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);

  for (Table table : kAllTables) {
    auto& values = p.data(table);
    values.resize(p.rows(table) * p.width(table));
    if (table == Table::kRelationMatrix) {
      for (std::size_t r = 0; r < p.rows(table); ++r) {
        auto m = p.row(table, r);
        for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = 1.0;
      }
    } else if (table == Table::kRelation && kind == ModelKind::kRotatE) {
      for (double& v : values) v = angle(rng);
    } else {
      for (double& v : values) v = uniform(rng);
    }
  }
  if (kind == ModelKind::kTransH) {
    for (std::size_t r = 0; r < num_relations; ++r) {
      normalize_to_unit(p.row(Table::kRelationProjection, r));
    }
  }
  return p;
}

void project_entity(const ModelParams& p, EntityId entity, RelationId relation,
                    std::span<double> out) {
  const std::size_t d = p.dim;
  const auto e = p.row(Table::kEntity, static_cast<std::size_t>(entity));
  const auto r = static_cast<std::size_t>(relation);
  switch (p.kind) {
    case ModelKind::kTransE:
    case ModelKind::kRotatE:
      for (std::size_t i = 0; i < e.size() && i < out.size(); ++i) out[i] = e[i];
      return;
    case ModelKind::kTransH: {
      const auto w = p.row(Table::kRelationProjection, r);
      const double we = dot(w, e);
      for (std::size_t i = 0; i < d; ++i) out[i] = e[i] - we * w[i];
      return;
    }
    case ModelKind::kTransD: {
      const auto w_e = p.row(Table::kEntityProjection, static_cast<std::size_t>(entity));
      const auto w_r = p.row(Table::kRelationProjection, r);
      const double we = dot(w_e, e);
      for (std::size_t i = 0; i < d; ++i) out[i] = e[i] + we * w_r[i];
      return;
    }
    case ModelKind::kTransR: {
      const auto m = p.row(Table::kRelationMatrix, r);
      for (std::size_t i = 0; i < d; ++i) out[i] = dot(m.subspan(i * d, d), e);
      return;
    }
  }
}

double score(const ModelParams& p, const Triple& t) {
  check_triple(p, t);
  if (p.kind == ModelKind::kRotatE) return rotate_score(p, t);
  const std::size_t d = p.dim;
  const auto rel = p.row(Table::kRelation, static_cast<std::size_t>(t.relation));
  if (p.kind == ModelKind::kTransE) {
    const auto h = p.row(Table::kEntity, static_cast<std::size_t>(t.head));
    const auto tl = p.row(Table::kEntity, static_cast<std::size_t>(t.tail));
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = (h[i] + rel[i]) - tl[i];
      sum += v * v;
    }
    return -sum;
  }
  Scratch& s = scratch(d);
  project_entity(p, t.head, t.relation, s.a);
  project_entity(p, t.tail, t.relation, s.b);
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double v = (s.a[i] + rel[i]) - s.b[i];
    sum += v * v;
  }
  return -sum;
}

SparseGradient::SparseGradient(const ModelParams& shape) {
  for (Table table : kAllTables) {
    Block& b = block(table);
    b.width = shape.width(table);
    b.slot.assign(shape.rows(table), -1);
  }
}

void SparseGradient::add(Table table, std::size_t id,
                         std::span<const double> values, double scale) {
  Block& b = block(table);
  if (id >= b.slot.size()) throw std::out_of_range("gradient row out of range");
  std::int32_t slot = b.slot[id];
  if (slot < 0) {
    slot = static_cast<std::int32_t>(b.ids.size());
    b.slot[id] = slot;
    b.ids.push_back(static_cast<std::int32_t>(id));
    b.values.resize(b.values.size() + b.width, 0.0);
  }
  double* dst = b.values.data() + static_cast<std::size_t>(slot) * b.width;
  for (std::size_t i = 0; i < b.width; ++i) dst[i] += scale * values[i];
}

std::span<const std::int32_t> SparseGradient::touched(Table table) const {
  return block(table).ids;
}

std::span<const double> SparseGradient::row(Table table, std::size_t id) const {
  const Block& b = block(table);
  if (id >= b.slot.size() || b.slot[id] < 0) return {};
  return std::span<const double>(b.values).subspan(
      static_cast<std::size_t>(b.slot[id]) * b.width, b.width);
}

void SparseGradient::clear() {
  for (Block& b : blocks_) {
    for (std::int32_t id : b.ids) b.slot[static_cast<std::size_t>(id)] = -1;
    b.ids.clear();
    b.values.clear();
  }
}

bool SparseGradient::empty() const {
  for (const Block& b : blocks_) {
    if (!b.ids.empty()) return false;
  }
  return true;
}

void add_score_gradient(const ModelParams& p, const Triple& t, double scale,
                        SparseGradient& out) {
  check_triple(p, t);
  const std::size_t d = p.dim;
  const auto h_id = static_cast<std::size_t>(t.head);
  const auto t_id = static_cast<std::size_t>(t.tail);
  const auto r_id = static_cast<std::size_t>(t.relation);

  if (p.kind == ModelKind::kRotatE) {
    const auto h = p.row(Table::kEntity, h_id);
    const auto tl = p.row(Table::kEntity, t_id);
    const auto phase = p.row(Table::kRelation, r_id);
    Scratch& s = scratch(2 * d);
    auto& gh = s.a;
    auto& gt = s.b;
    auto& gr = s.c;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = std::cos(phase[i]);
      const double sn = std::sin(phase[i]);
      const double hr = h[i], hi = h[d + i];
      const double dr = (hr * c - hi * sn) - tl[i];
      const double di = (hr * sn + hi * c) - tl[d + i];
      const double m = std::sqrt(dr * dr + di * di);
      // Unit residual direction; the subgradient at a zero residual is 0.
      const double ur = m > 0.0 ? dr / m : 0.0;
      const double ui = m > 0.0 ? di / m : 0.0;
      gh[i] = -(ur * c + ui * sn);
      gh[d + i] = -(ui * c - ur * sn);
      gt[i] = ur;
      gt[d + i] = ui;
      gr[i] = -(ur * (-hr * sn - hi * c) + ui * (hr * c - hi * sn));
    }
    out.add(Table::kEntity, h_id, gh, scale);
    out.add(Table::kEntity, t_id, gt, scale);
    out.add(Table::kRelation, r_id, std::span<const double>(gr).first(d), scale);
    return;
  }

  const auto h = p.row(Table::kEntity, h_id);
  const auto tl = p.row(Table::kEntity, t_id);
  const auto rel = p.row(Table::kRelation, r_id);
  Scratch& s = scratch(d);
  auto& hp = s.a;
  auto& tp = s.b;
  auto& g = s.c;  // d(score)/d(residual) = -2 * residual
  project_entity(p, t.head, t.relation, hp);
  project_entity(p, t.tail, t.relation, tp);
  for (std::size_t i = 0; i < d; ++i) g[i] = -2.0 * ((hp[i] + rel[i]) - tp[i]);

  out.add(Table::kRelation, r_id, g, scale);

  switch (p.kind) {
    case ModelKind::kTransE: {
      out.add(Table::kEntity, h_id, g, scale);
      out.add(Table::kEntity, t_id, g, -scale);
      return;
    }
    case ModelKind::kTransH: {
      const auto w = p.row(Table::kRelationProjection, r_id);
      const double wg = dot(w, g);
      auto& ge = s.d;
      for (std::size_t i = 0; i < d; ++i) ge[i] = g[i] - wg * w[i];
      out.add(Table::kEntity, h_id, ge, scale);
      out.add(Table::kEntity, t_id, ge, -scale);
      // h_p - t_p = (h - t) - (w . (h - t)) w
      auto& gw = s.e;
      double w_diff = 0.0;
      for (std::size_t i = 0; i < d; ++i) w_diff += w[i] * (h[i] - tl[i]);
      for (std::size_t i = 0; i < d; ++i) {
        gw[i] = -wg * (h[i] - tl[i]) - w_diff * g[i];
      }
      out.add(Table::kRelationProjection, r_id, gw, scale);
      return;
    }
    case ModelKind::kTransD: {
      const auto w_r = p.row(Table::kRelationProjection, r_id);
      const auto w_h = p.row(Table::kEntityProjection, h_id);
      const auto w_t = p.row(Table::kEntityProjection, t_id);
      const double rg = dot(w_r, g);
      const double wh_h = dot(w_h, h);
      const double wt_t = dot(w_t, tl);
      auto& tmp = s.d;
      for (std::size_t i = 0; i < d; ++i) tmp[i] = g[i] + rg * w_h[i];
      out.add(Table::kEntity, h_id, tmp, scale);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = g[i] + rg * w_t[i];
      out.add(Table::kEntity, t_id, tmp, -scale);
      out.add(Table::kEntityProjection, h_id, h, scale * rg);
      out.add(Table::kEntityProjection, t_id, tl, -scale * rg);
      out.add(Table::kRelationProjection, r_id, g, scale * (wh_h - wt_t));
      return;
    }
    case ModelKind::kTransR: {
      const auto m = p.row(Table::kRelationMatrix, r_id);
      auto& mtg = s.d;
      for (std::size_t j = 0; j < d; ++j) mtg[j] = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) mtg[j] += m[i * d + j] * g[i];
      }
      out.add(Table::kEntity, h_id, mtg, scale);
      out.add(Table::kEntity, t_id, mtg, -scale);
      thread_local std::vector<double> gm;
      gm.resize(d * d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) gm[i * d + j] = g[i] * (h[j] - tl[j]);
      }
      out.add(Table::kRelationMatrix, r_id, gm, scale);
      return;
    }
    case ModelKind::kRotatE:
      return;
  }
}

SparseGradient score_gradients(const ModelParams& params, const Triple& triple) {
  SparseGradient g(params);
  add_score_gradient(params, triple, 1.0, g);
  return g;
}

void apply_constraints(ModelParams& p) {
  for (std::size_t e = 0; e < p.num_entities; ++e) constrain_entity(p, e);
  for (std::size_t r = 0; r < p.num_relations; ++r) constrain_relation(p, r);
}

void apply_constraints(ModelParams& p, std::span<const std::int32_t> entities,
                       std::span<const std::int32_t> relations) {
  for (std::int32_t e : entities) constrain_entity(p, static_cast<std::size_t>(e));
  for (std::int32_t r : relations) constrain_relation(p, static_cast<std::size_t>(r));
}

}  // namespace kgforge
