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


#ifndef KGFORGE_CHECKPOINT_H_
#define KGFORGE_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "kgforge/graph.h"
#include "kgforge/models.h"

namespace kgforge {

// A checkpoint is one line of JSON header followed by the parameter tables as
// little-endian IEEE-754 doubles, in Table declaration order. The header holds
// the model kind, sizes, seed, table shapes and an optional free-form
// "metadata" object (the trainer stores its config there).
struct Checkpoint {
  ModelParams params;
  nlohmann::json metadata = nlohmann::json::object();
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Throws CheckpointError on malformed or truncated input.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CheckpointError when entity / relation counts differ from the data.
void validate_checkpoint(const ModelParams& params, const DatasetStats& stats);

}  // namespace kgforge

#endif  // KGFORGE_CHECKPOINT_H_
