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


#ifndef KGFORGE_BENCH_H_
#define KGFORGE_BENCH_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"
#include "kgforge/graph.h"
#include "kgforge/models.h"
#include "kgforge/trainer.h"

namespace kgforge {

struct BenchResult {
  ModelKind kind = ModelKind::kTransE;
  std::size_t dim = 0;
  std::size_t train_triples = 0;
  std::vector<double> epoch_seconds;
  double mean_epoch_seconds = 0.0;
  // Positive plus negative triple scores per second of training.
  double scores_per_second = 0.0;
};

// Times `epochs` training epochs from a fresh initialization. Informational
// only; nothing here is compared against a threshold.
BenchResult bench_model(const Dataset& dataset, ModelKind kind,
                        const TrainConfig& config, int epochs);

// Seconds per FB15k237 epoch at d = 200 published for the OpenKE
// implementations on an Nvidia K80 (TransE, TransH, TransD, RotatE).
std::optional<double> published_epoch_seconds(ModelKind kind);

nlohmann::json to_json(const BenchResult& result);

}  // namespace kgforge

#endif  // KGFORGE_BENCH_H_
