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


#include "kgforge/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "kgforge/errors.h"

namespace kgforge {

namespace {

constexpr const char* kFormatTag = "kgforge-checkpoint";
constexpr int kFormatVersion = 1;

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

void write_table(std::ostream& out, const std::vector<double>& values) {
  std::vector<char> buffer(values.size() * sizeof(double));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(buffer.data() + i * sizeof(double), &bits, sizeof(bits));
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

void read_table(std::istream& in, std::vector<double>& values) {
  std::vector<char> buffer(values.size() * sizeof(double));
  in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
    throw CheckpointError("checkpoint truncated");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, buffer.data() + i * sizeof(double), sizeof(bits));
    values[i] = std::bit_cast<double>(to_little_endian(bits));
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  const ModelParams& p = checkpoint.params;
  nlohmann::json tables = nlohmann::json::array();
  for (Table table : kAllTables) {
    if (p.rows(table) == 0) continue;
    tables.push_back({{"name", table_name(table)},
                      {"rows", p.rows(table)},
                      {"cols", p.width(table)}});
  }
  nlohmann::json header = {{"format", kFormatTag},
                           {"version", kFormatVersion},
                           {"model", model_name(p.kind)},
                           {"entities", p.num_entities},
                           {"relations", p.num_relations},
                           {"dim", p.dim},
                           {"seed", p.seed},
                           {"byte_order", "little"},
                           {"tables", tables},
                           {"metadata", checkpoint.metadata}};
  out << header.dump() << '\n';
  for (Table table : kAllTables) {
    if (p.rows(table) == 0) continue;
    write_table(out, p.data(table));
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  write_checkpoint(out, checkpoint);
  out.close();
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    if (header.at("format") != kFormatTag) throw CheckpointError("not a kgforge checkpoint");
    if (header.at("version") != kFormatVersion) {
      throw CheckpointError("unsupported checkpoint version");
    }
    ModelParams& p = ckpt.params;
    p.kind = parse_model(header.at("model").get<std::string>());
    p.num_entities = header.at("entities").get<std::size_t>();
    p.num_relations = header.at("relations").get<std::size_t>();
    p.dim = header.at("dim").get<std::size_t>();
    p.seed = header.at("seed").get<std::uint64_t>();
    if (header.contains("metadata")) ckpt.metadata = header["metadata"];

    const auto& tables = header.at("tables");
    std::size_t next = 0;
    for (Table table : kAllTables) {
      if (p.rows(table) == 0) continue;
      if (next >= tables.size() || tables[next].at("name") != table_name(table) ||
          tables[next].at("rows").get<std::size_t>() != p.rows(table) ||
          tables[next].at("cols").get<std::size_t>() != p.width(table)) {
        throw CheckpointError("checkpoint table layout does not match model " +
                              std::string(model_name(p.kind)));
      }
      ++next;
      p.data(table).resize(p.rows(table) * p.width(table));
      read_table(in, p.data(table));
    }
    if (next != tables.size()) throw CheckpointError("unexpected extra tables");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(e.what());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in);
}

void validate_checkpoint(const ModelParams& params, const DatasetStats& stats) {
  if (params.num_entities != stats.entities ||
      params.num_relations != stats.relations) {
    throw CheckpointError(
        "checkpoint has " + std::to_string(params.num_entities) + " entities and " +
        std::to_string(params.num_relations) + " relations, dataset has " +
        std::to_string(stats.entities) + " entities and " +
        std::to_string(stats.relations) + " relations");
  }
}

}  // namespace kgforge
