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


#ifndef KGFORGE_MODELS_H_
#define KGFORGE_MODELS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgforge/graph.h"

namespace kgforge {

enum class ModelKind { kTransE, kTransH, kTransD, kTransR, kRotatE };

inline constexpr std::array<ModelKind, 5> kAllModels = {
    ModelKind::kTransE, ModelKind::kTransH, ModelKind::kTransD,
    ModelKind::kTransR, ModelKind::kRotatE};

// Lower-case names: transe, transh, transd, transr, rotate.
std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);

// Parameter tables, each a contiguous row-major block addressed by id.
enum class Table {
  kEntity,              // n_e x d, RotatE: n_e x 2d (d real parts, d imaginary)
  kRelation,            // n_r x d, RotatE: rotation phases
  kEntityProjection,    // TransD: n_e x d
  kRelationProjection,  // TransH: hyperplane normals; TransD: n_r x d
  kRelationMatrix,      // TransR: n_r x (d*d)
};

inline constexpr std::array<Table, 5> kAllTables = {
    Table::kEntity, Table::kRelation, Table::kEntityProjection,
    Table::kRelationProjection, Table::kRelationMatrix};

std::string_view table_name(Table table);

struct ModelParams {
  ModelKind kind = ModelKind::kTransE;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;

  std::vector<double> entity;
  std::vector<double> relation;
  std::vector<double> entity_projection;
  std::vector<double> relation_projection;
  std::vector<double> relation_matrix;

  // Row count and width of a table; 0 rows for tables the model lacks.
  std::size_t rows(Table table) const;
  std::size_t width(Table table) const;
  std::vector<double>& data(Table table);
  const std::vector<double>& data(Table table) const;

  std::span<double> row(Table table, std::size_t id) {
    const std::size_t w = width(table);
    return std::span<double>(data(table)).subspan(id * w, w);
  }
  std::span<const double> row(Table table, std::size_t id) const {
    const std::size_t w = width(table);
    return std::span<const double>(data(table)).subspan(id * w, w);
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Uniform in [-6/sqrt(d), 6/sqrt(d)] for embeddings and projection vectors.
// TransH normals are then normalized, TransR matrices start at identity and
// RotatE phases are uniform in [0, 2pi). Deterministic for a given seed.
ModelParams init_params(ModelKind kind, std::size_t num_entities,
                        std::size_t num_relations, std::size_t dim,
                        std::uint64_t seed);

// Negated distance, so higher is better and the maximum is 0.
//   TransE   -||h + r - t||^2
//   TransH   -||h_p + r - t_p||^2, e_p = e - (w_r . e) w_r
//   TransD   -||h_p + r - t_p||^2, e_p = e + (w_e . e) w_r
//   TransR   -||M_r h + r - M_r t||^2
//   RotatE   -sum_i |h_i * exp(i theta_i) - t_i|
// Throws std::out_of_range on invalid ids.
double score(const ModelParams& params, const Triple& triple);

// Accumulates scale * d(score)/d(parameter) for one triple, row by row.
// Only rows touched by the triple are stored.
class SparseGradient {
 public:
  SparseGradient() = default;
  explicit SparseGradient(const ModelParams& shape);

  // Adds `scale * values` into the gradient row (table, id).
  void add(Table table, std::size_t id, std::span<const double> values,
           double scale);

  // Rows touched since the last clear(), in first-touch order.
  std::span<const std::int32_t> touched(Table table) const;
  // Gradient row for a touched id, or an empty span.
  std::span<const double> row(Table table, std::size_t id) const;

  void clear();
  bool empty() const;

 private:
  struct Block {
    std::size_t width = 0;
    std::vector<std::int32_t> slot;  // id -> position in `ids`, or -1
    std::vector<std::int32_t> ids;
    std::vector<double> values;
  };
  Block& block(Table table) { return blocks_[static_cast<std::size_t>(table)]; }
  const Block& block(Table table) const {
    return blocks_[static_cast<std::size_t>(table)];
  }
  std::array<Block, kAllTables.size()> blocks_;
};

// Adds scale * gradient of score(params, triple) into `out`. For RotatE the
// L1 norm uses the subgradient 0 where a residual component vanishes.
void add_score_gradient(const ModelParams& params, const Triple& triple,
                        double scale, SparseGradient& out);

SparseGradient score_gradients(const ModelParams& params, const Triple& triple);

// Entity projection under `relation` for TransE/H/D/R: the vector the score
// compares. For TransE it is the entity vector itself. Not used by RotatE.
void project_entity(const ModelParams& params, EntityId entity,
                    RelationId relation, std::span<double> out);

// Trans* models: entity L2 norms capped at 1, TransH normals rescaled to unit
// length, TransD projection vectors capped at 1. RotatE: phases wrapped into
// [0, 2pi). Idempotent.
void apply_constraints(ModelParams& params);
// Same, restricted to the listed rows.
void apply_constraints(ModelParams& params, std::span<const std::int32_t> entities,
                       std::span<const std::int32_t> relations);

}  // namespace kgforge

#endif  // KGFORGE_MODELS_H_
