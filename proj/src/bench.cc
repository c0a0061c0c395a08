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


#include "kgforge/bench.h"

#include <numeric>

#include "kgforge/errors.h"

namespace kgforge {

BenchResult bench_model(const Dataset& dataset, ModelKind kind,
                        const TrainConfig& config, int epochs) {
  if (epochs < 1) throw ConfigError("bench needs at least one epoch");
  if (dataset.train.empty()) throw TrainingError("training split is empty");
  BenchResult result;
  result.kind = kind;
  result.dim = config.dim;
  result.train_triples = dataset.train.size();

  ModelParams params = init_params(kind, dataset.num_entities(), dataset.num_relations(),
                                   config.dim, config.seed);
  if (config.constrain_per_batch) apply_constraints(params);
  std::mt19937_64 rng(config.seed);
  Trainer trainer(params, config, rng);
  for (int e = 0; e < epochs; ++e) {
    result.epoch_seconds.push_back(trainer.run_epoch(dataset.train).seconds);
  }
  const double total =
      std::accumulate(result.epoch_seconds.begin(), result.epoch_seconds.end(), 0.0);
  result.mean_epoch_seconds = total / epochs;
  const double scores_per_epoch = static_cast<double>(dataset.train.size()) *
                                  (1.0 + static_cast<double>(config.negatives));
  result.scores_per_second =
      total > 0.0 ? scores_per_epoch * epochs / total : 0.0;
  return result;
}

std::optional<double> published_epoch_seconds(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTransE: return 2.8;
    case ModelKind::kTransH: return 5.2;
    case ModelKind::kTransD: return 5.2;
    case ModelKind::kRotatE: return 5.0;
    case ModelKind::kTransR: return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json j = {{"model", model_name(r.kind)},
                      {"dim", r.dim},
                      {"train_triples", r.train_triples},
                      {"epoch_seconds", r.epoch_seconds},
                      {"seconds_per_epoch", r.mean_epoch_seconds},
                      {"scores_per_second", r.scores_per_second}};
  if (auto ref = published_epoch_seconds(r.kind)) {
    j["published_seconds_per_epoch_k80"] = *ref;
  } else {
    j["published_seconds_per_epoch_k80"] = nullptr;
  }
  return j;
}

}  // namespace kgforge
