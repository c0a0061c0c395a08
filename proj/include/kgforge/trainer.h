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


#ifndef KGFORGE_TRAINER_H_
#define KGFORGE_TRAINER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgforge/evaluator.h"
#include "kgforge/graph.h"
#include "kgforge/models.h"

namespace kgforge {

enum class Optimizer { kSgd, kAdagrad };

struct TrainConfig {
  // Validation MRR is always measured at these epochs; the run lasts until the
  // largest one.
  std::vector<int> epoch_candidates = {200, 500, 1000, 2000};
  int batch_size = 1024;
  double learning_rate = 0.01;
  double margin = 1.0;
  int negatives = 1;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kSgd;
  bool constrain_per_batch = true;
  int valid_interval = 50;
  std::size_t dim = 200;
  // 1 is deterministic. More threads split each batch's gradient work.
  int threads = 1;

  int max_epochs() const;
  // Throws ConfigError for non-positive values.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& config);

// Sets one field from its text form; throws ConfigError for unknown keys or
// unparsable values. Keys match the JSON field names.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` lines; blank lines and `#` comments are ignored.
void parse_train_config(std::istream& in, TrainConfig& config);

// Throws ConfigError if two runs meant for comparison differ in any
// hyperparameter other than the seed.
void require_same_hyperparameters(const TrainConfig& a, const TrainConfig& b);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
  double triples_per_second = 0.0;
};

struct EpochRecord {
  EpochStats stats;
  std::optional<double> valid_mrr;
};

nlohmann::json to_json(const EpochRecord& record);

// Replaces the head or the tail (probability 1/2 each) with a different
// entity drawn uniformly from all entities. Throws TrainingError if
// num_entities < 2.
Triple sample_negative(const Triple& triple, std::size_t num_entities,
                       std::mt19937_64& rng);

// max(0, margin - positive + negative) for negated-distance scores.
double margin_loss(double positive_score, double negative_score, double margin);

// Margin-ranking epochs over a fixed parameter set. Keeps optimizer state
// (Adagrad accumulators) between epochs.
class Trainer {
 public:
  Trainer(ModelParams& params, const TrainConfig& config, std::mt19937_64& rng);

  // Shuffles, then per batch: draws negatives, accumulates the hinge
  // gradient, takes one optimizer step and renormalizes the touched rows.
  // Throws TrainingError on a non-finite batch loss.
  EpochStats run_epoch(std::span<const Triple> train);

  int epochs_done() const { return epochs_done_; }

 private:
  void step();

  ModelParams& params_;
  TrainConfig config_;
  std::mt19937_64& rng_;
  SparseGradient gradient_;
  std::vector<SparseGradient> worker_gradients_;
  std::array<std::vector<double>, kAllTables.size()> adagrad_;
  std::vector<std::size_t> order_;
  int epochs_done_ = 0;
};

// One epoch with fresh optimizer state.
EpochStats train_epoch(ModelParams& params, std::span<const Triple> train,
                       const TrainConfig& config, std::mt19937_64& rng);

struct TrainResult {
  ModelParams best;
  int best_epoch = 0;
  double best_valid_mrr = 0.0;
  std::vector<EpochRecord> history;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
};

// Initializes parameters from config.seed, trains up to max_epochs() and
// returns the parameters of the epoch with the best filtered validation MRR
// (earliest on ties). The filter covers every split of `dataset`.
TrainResult train(const Dataset& dataset, ModelKind kind, const TrainConfig& config,
                  const TrainCallbacks& callbacks = {});

// Continues from `initial` instead of a fresh initialization. Throws
// CheckpointError when its sizes or dimension disagree with the dataset or
// config.
TrainResult train(const Dataset& dataset, ModelParams initial, const TrainConfig& config,
                  const TrainCallbacks& callbacks = {});

}  // namespace kgforge

#endif  // KGFORGE_TRAINER_H_
