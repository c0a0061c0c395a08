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


#include "kgforge/trainer.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <thread>

#include "kgforge/checkpoint.h"
#include "kgforge/errors.h"
#include "kgforge/triple_index.h"

namespace kgforge {

namespace {

constexpr double kAdagradEpsilon = 1e-10;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string value = trim(text);
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("bad value '" + value + "' for '" + std::string(key) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("bad boolean '" + v + "' for '" + std::string(key) + "'");
}

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::kSgd ? "sgd" : "adagrad";
}

}  // namespace

int TrainConfig::max_epochs() const {
  return epoch_candidates.empty()
             ? 0
             : *std::max_element(epoch_candidates.begin(), epoch_candidates.end());
}

void TrainConfig::validate() const {
  if (epoch_candidates.empty()) throw ConfigError("at least one epoch candidate is required");
  for (int e : epoch_candidates) {
    if (e <= 0) throw ConfigError("epoch candidates must be positive");
  }
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (negatives <= 0) throw ConfigError("negatives must be positive");
  if (valid_interval <= 0) throw ConfigError("valid_interval must be positive");
  if (dim == 0) throw ConfigError("dim must be positive");
  if (threads <= 0) throw ConfigError("threads must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epoch_candidates},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"margin", c.margin},
          {"negatives", c.negatives},
          {"seed", c.seed},
          {"optimizer", optimizer_name(c.optimizer)},
          {"constrain_per_batch", c.constrain_per_batch},
          {"valid_interval", c.valid_interval},
          {"dim", c.dim},
          {"threads", c.threads}};
}

void set_config_value(TrainConfig& c, std::string_view key, std::string_view value) {
  if (key == "epochs") {
    c.epoch_candidates.clear();
    std::string list(value);
    std::replace(list.begin(), list.end(), ',', ' ');
    std::istringstream in(list);
    std::string item;
    while (in >> item) c.epoch_candidates.push_back(parse_number<int>(key, item));
    if (c.epoch_candidates.empty()) throw ConfigError("epochs needs at least one value");
  } else if (key == "batch_size") {
    c.batch_size = parse_number<int>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "margin") {
    c.margin = parse_number<double>(key, value);
  } else if (key == "negatives") {
    c.negatives = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "optimizer") {
    const std::string v = trim(value);
    if (v == "sgd") {
      c.optimizer = Optimizer::kSgd;
    } else if (v == "adagrad") {
      c.optimizer = Optimizer::kAdagrad;
    } else {
      throw ConfigError("unknown optimizer '" + v + "' (expected sgd or adagrad)");
    }
  } else if (key == "constrain_per_batch") {
    c.constrain_per_batch = parse_bool(key, value);
  } else if (key == "valid_interval") {
    c.valid_interval = parse_number<int>(key, value);
  } else if (key == "dim") {
    c.dim = parse_number<std::size_t>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void parse_train_config(std::istream& in, TrainConfig& config) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(std::string_view(line).substr(0, eq)),
                       trim(std::string_view(line).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void require_same_hyperparameters(const TrainConfig& a, const TrainConfig& b) {
  nlohmann::json ja = to_json(a), jb = to_json(b);
  ja.erase("seed");
  jb.erase("seed");
  if (ja != jb) {
    throw ConfigError("runs use different hyperparameters: " + ja.dump() + " vs " +
                      jb.dump());
  }
}

nlohmann::json to_json(const EpochRecord& record) {
  nlohmann::json j = {{"epoch", record.stats.epoch},
                      {"loss", record.stats.mean_loss},
                      {"seconds", record.stats.seconds}};
  if (record.valid_mrr) j["valid_mrr"] = *record.valid_mrr;
  return j;
}

Triple sample_negative(const Triple& triple, std::size_t num_entities,
                       std::mt19937_64& rng) {
  if (num_entities < 2) {
    throw TrainingError("negative sampling needs at least 2 entities");
  }
  const bool replace_head = (rng() >> 63) != 0;
  std::uniform_int_distribution<std::uint64_t> pick(0, num_entities - 2);
  Triple out = triple;
  EntityId& slot = replace_head ? out.head : out.tail;
  // Draw from the n-1 entities other than the current one.
  auto candidate = static_cast<EntityId>(pick(rng));
  if (candidate >= slot) ++candidate;
  slot = candidate;
  return out;
}

double margin_loss(double positive_score, double negative_score, double margin) {
  const double raw = margin - positive_score + negative_score;
  // NaN must reach the caller's finiteness check rather than clamp to 0.
  if (std::isnan(raw)) return raw;
  return raw > 0.0 ? raw : 0.0;
}

Trainer::Trainer(ModelParams& params, const TrainConfig& config, std::mt19937_64& rng)
    : params_(params), config_(config), rng_(rng), gradient_(params) {
  config_.validate();
  if (config_.threads > 1) {
    worker_gradients_.assign(static_cast<std::size_t>(config_.threads),
                             SparseGradient(params));
  }
}

void Trainer::step() {
  const double lr = config_.learning_rate;
  for (Table table : kAllTables) {
    const auto rows = gradient_.touched(table);
    if (rows.empty()) continue;
    const std::size_t width = params_.width(table);
    auto& accum = adagrad_[static_cast<std::size_t>(table)];
    if (config_.optimizer == Optimizer::kAdagrad && accum.empty()) {
      accum.assign(params_.data(table).size(), 0.0);
    }
    for (std::int32_t id : rows) {
      const auto g = gradient_.row(table, static_cast<std::size_t>(id));
      auto p = params_.row(table, static_cast<std::size_t>(id));
      if (config_.optimizer == Optimizer::kSgd) {
        for (std::size_t i = 0; i < width; ++i) p[i] -= lr * g[i];
      } else {
        double* acc = accum.data() + static_cast<std::size_t>(id) * width;
        for (std::size_t i = 0; i < width; ++i) {
          acc[i] += g[i] * g[i];
          p[i] -= lr * g[i] / (std::sqrt(acc[i]) + kAdagradEpsilon);
        }
      }
    }
  }
  if (config_.constrain_per_batch) {
    apply_constraints(params_, gradient_.touched(Table::kEntity),
                      gradient_.touched(Table::kRelation));
    if (params_.kind == ModelKind::kTransH) {
      // Normals live in their own table but are owned by the relation.
      apply_constraints(params_, {}, gradient_.touched(Table::kRelationProjection));
    }
  }
}

EpochStats Trainer::run_epoch(std::span<const Triple> train) {
  const auto start = std::chrono::steady_clock::now();
  order_.resize(train.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);

  const auto batch = static_cast<std::size_t>(config_.batch_size);
  const auto negatives = static_cast<std::size_t>(config_.negatives);
  double loss_sum = 0.0;
  std::size_t pairs = 0;
  std::vector<Triple> batch_neg;

  // Loss and gradient contribution of positives [begin, end) of the batch.
  auto accumulate = [&](std::span<const std::size_t> positives,
                        std::span<const Triple> negs, SparseGradient& grad) {
    double sum = 0.0;
    for (std::size_t i = 0; i < positives.size(); ++i) {
      const Triple& pos = train[positives[i]];
      const double pos_score = score(params_, pos);
      for (std::size_t k = 0; k < negatives; ++k) {
        const Triple& neg = negs[i * negatives + k];
        const double loss = margin_loss(pos_score, score(params_, neg), config_.margin);
        sum += loss;
        if (loss > 0.0) {
          add_score_gradient(params_, pos, -1.0, grad);
          add_score_gradient(params_, neg, 1.0, grad);
        }
      }
    }
    return sum;
  };

  std::size_t batch_index = 0;
  for (std::size_t begin = 0; begin < order_.size(); begin += batch, ++batch_index) {
    const std::size_t end = std::min(order_.size(), begin + batch);
    const std::span<const std::size_t> positives(order_.data() + begin, end - begin);
    batch_neg.clear();
    for (std::size_t idx : positives) {
      for (std::size_t k = 0; k < negatives; ++k) {
        batch_neg.push_back(sample_negative(train[idx], params_.num_entities, rng_));
      }
    }

    double batch_loss = 0.0;
    if (worker_gradients_.empty()) {
      batch_loss = accumulate(positives, batch_neg, gradient_);
    } else {
      const std::size_t workers = worker_gradients_.size();
      std::vector<double> partial(workers, 0.0);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = positives.size() * w / workers;
        const std::size_t hi = positives.size() * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
          partial[w] = accumulate(positives.subspan(lo, hi - lo),
                                  std::span<const Triple>(batch_neg)
                                      .subspan(lo * negatives, (hi - lo) * negatives),
                                  worker_gradients_[w]);
        });
      }
      for (auto& t : pool) t.join();
      for (std::size_t w = 0; w < workers; ++w) {
        batch_loss += partial[w];
        for (Table table : kAllTables) {
          for (std::int32_t id : worker_gradients_[w].touched(table)) {
            gradient_.add(table, static_cast<std::size_t>(id),
                          worker_gradients_[w].row(table, static_cast<std::size_t>(id)),
                          1.0);
          }
        }
        worker_gradients_[w].clear();
      }
    }

    if (!std::isfinite(batch_loss)) {
      throw TrainingError("non-finite loss in epoch " + std::to_string(epochs_done_ + 1) +
                          ", batch " + std::to_string(batch_index) + " (positives " +
                          std::to_string(begin) + ".." + std::to_string(end - 1) +
                          " of the shuffled order)");
    }
    loss_sum += batch_loss;
    pairs += positives.size() * negatives;
    step();
    gradient_.clear();
  }

  ++epochs_done_;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EpochStats stats;
  stats.epoch = epochs_done_;
  stats.mean_loss = pairs == 0 ? 0.0 : loss_sum / static_cast<double>(pairs);
  stats.seconds = seconds;
  stats.triples_per_second =
      seconds > 0.0 ? static_cast<double>(train.size()) / seconds : 0.0;
  return stats;
}

EpochStats train_epoch(ModelParams& params, std::span<const Triple> train,
                       const TrainConfig& config, std::mt19937_64& rng) {
  Trainer trainer(params, config, rng);
  return trainer.run_epoch(train);
}

TrainResult train(const Dataset& dataset, ModelKind kind, const TrainConfig& config,
                  const TrainCallbacks& callbacks) {
  config.validate();
  if (dataset.num_entities() == 0 || dataset.num_relations() == 0) {
    throw TrainingError("dataset has no entities or relations");
  }
  return train(dataset,
               init_params(kind, dataset.num_entities(), dataset.num_relations(),
                           config.dim, config.seed),
               config, callbacks);
}

TrainResult train(const Dataset& dataset, ModelParams params, const TrainConfig& config,
                  const TrainCallbacks& callbacks) {
  config.validate();
  if (dataset.train.empty()) throw TrainingError("training split is empty");
  if (dataset.valid.empty()) throw TrainingError("validation split is empty");
  validate_checkpoint(params, dataset_stats(dataset));
  if (params.dim != config.dim) {
    throw CheckpointError("parameters have dimension " + std::to_string(params.dim) +
                          " but the config asks for " + std::to_string(config.dim));
  }

  TrainResult result;
  if (config.constrain_per_batch) apply_constraints(params);

  // Separate stream from the one used for initialization.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Trainer trainer(params, config, rng);
  const TripleIndex filter = build_index(dataset);
  EvalConfig eval;
  eval.threads = config.threads;

  const int max_epochs = config.max_epochs();
  double best = -1.0;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    EpochRecord record;
    record.stats = trainer.run_epoch(dataset.train);
    const bool candidate =
        std::find(config.epoch_candidates.begin(), config.epoch_candidates.end(), epoch) !=
        config.epoch_candidates.end();
    if (candidate || epoch % config.valid_interval == 0) {
      const double mrr = evaluate(params, dataset.valid, &filter, eval).mrr;
      record.valid_mrr = mrr;
      if (mrr > best) {
        best = mrr;
        result.best = params;
        result.best_epoch = epoch;
        result.best_valid_mrr = mrr;
      }
    }
    result.history.push_back(record);
    if (callbacks.on_epoch) callbacks.on_epoch(record);
  }
  return result;
}

}  // namespace kgforge
