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


#include "kgforge/dataset_io.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "kgforge/errors.h"

namespace kgforge {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEntityVocabFile = "entity2id.txt";
constexpr std::string_view kRelationVocabFile = "relation2id.txt";

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::int64_t parse_nonnegative(std::string_view token, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    throw ParseError("expected a non-negative integer, got '" +
                         std::string(token) + "'",
                     line_no);
  }
  return value;
}

std::int32_t parse_id(std::string_view token, std::size_t line_no) {
  const std::int64_t v = parse_nonnegative(token, line_no);
  if (v > INT32_MAX) throw ParseError("id out of range", line_no);
  return static_cast<std::int32_t>(v);
}

// Reads the count header of an id-style file. Returns 0 for an empty stream.
std::size_t read_count(std::istream& in, std::size_t& line_no, bool& empty) {
  std::string line;
  empty = true;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    empty = false;
    auto tokens = split_whitespace(line);
    if (tokens.size() != 1) {
      throw ParseError("expected a count header", line_no);
    }
    return static_cast<std::size_t>(parse_nonnegative(tokens[0], line_no));
  }
  return 0;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Rethrows a parse error with the file name prepended.
template <typename F>
auto with_file_context(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), 0);
  }
}

struct SplitFiles {
  fs::path train, valid, test;
};

SplitFiles split_files(const fs::path& dir, DataFormat format) {
  auto pick = [&](std::initializer_list<std::string_view> names) {
    for (auto name : names) {
      fs::path p = dir / name;
      if (fs::exists(p)) return p;
    }
    return dir / *names.begin();
  };
  if (format == DataFormat::kIdFile) {
    return {pick({"train2id.txt", "train.txt"}), pick({"valid2id.txt", "valid.txt"}),
            pick({"test2id.txt", "test.txt"})};
  }
  return {pick({"train.txt", "train.tsv"}), pick({"valid.txt", "valid.tsv"}),
          pick({"test.txt", "test.tsv"})};
}

}  // namespace

DataFormat parse_format(std::string_view name) {
  if (name == "auto") return DataFormat::kAuto;
  if (name == "tsv") return DataFormat::kTsv;
  if (name == "idfile") return DataFormat::kIdFile;
  throw ConfigError("unknown dataset format '" + std::string(name) +
                    "' (expected auto, tsv or idfile)");
}

std::string_view format_name(DataFormat format) {
  switch (format) {
    case DataFormat::kAuto: return "auto";
    case DataFormat::kTsv: return "tsv";
    case DataFormat::kIdFile: return "idfile";
  }
  return "auto";
}

std::vector<LabeledTriple> parse_tsv(std::istream& in) {
  std::vector<LabeledTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::string_view view(line);
    const auto first = view.find('\t');
    const auto second =
        first == std::string_view::npos ? first : view.find('\t', first + 1);
    if (second == std::string_view::npos ||
        view.find('\t', second + 1) != std::string_view::npos) {
      throw ParseError("expected 3 tab-separated fields", line_no);
    }
    LabeledTriple t{std::string(view.substr(0, first)),
                    std::string(view.substr(first + 1, second - first - 1)),
                    std::string(view.substr(second + 1))};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw ParseError("empty field", line_no);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Triple> parse_id_triples(std::istream& in) {
  std::size_t line_no = 0;
  bool empty = false;
  const std::size_t expected = read_count(in, line_no, empty);
  std::vector<Triple> out;
  if (empty) return out;
  const std::size_t header_line = line_no;
  out.reserve(expected);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    auto tokens = split_whitespace(line);
    if (tokens.size() != 3) {
      throw ParseError("expected 'head tail relation'", line_no);
    }
    // Column order in id files is head, tail, relation.
    out.push_back({parse_id(tokens[0], line_no), parse_id(tokens[2], line_no),
                   parse_id(tokens[1], line_no)});
  }
  if (out.size() != expected) {
    throw ParseError("count header says " + std::to_string(expected) +
                         " triples but " + std::to_string(out.size()) +
                         " were read",
                     header_line);
  }
  return out;
}

LabelMap parse_label_ids(std::istream& in) {
  std::size_t line_no = 0;
  bool empty = false;
  const std::size_t expected = read_count(in, line_no, empty);
  const std::size_t header_line = line_no;
  std::vector<std::string> by_id(expected);
  std::vector<bool> seen(expected, false);
  std::size_t read = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("expected 'label<TAB>id'", line_no);
    }
    const auto id = static_cast<std::size_t>(
        parse_nonnegative(std::string_view(line).substr(tab + 1), line_no));
    if (id >= expected) {
      throw ParseError("id " + std::to_string(id) + " outside 0.." +
                           std::to_string(expected) + "-1",
                       line_no);
    }
    if (seen[id]) throw ParseError("duplicate id " + std::to_string(id), line_no);
    seen[id] = true;
    by_id[id] = line.substr(0, tab);
    ++read;
  }
  if (read != expected) {
    throw ParseError("count header says " + std::to_string(expected) +
                         " labels but " + std::to_string(read) + " were read",
                     header_line);
  }
  LabelMap labels;
  for (std::size_t id = 0; id < by_id.size(); ++id) {
    try {
      labels.insert_new(by_id[id]);
    } catch (const CollisionError&) {
      throw ParseError("duplicate label '" + by_id[id] + "'", 0);
    }
  }
  return labels;
}

void write_tsv(std::ostream& out, std::span<const LabeledTriple> triples) {
  for (const LabeledTriple& t : triples) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
}

void write_tsv(std::ostream& out, const Vocabulary& vocab,
               std::span<const Triple> triples) {
  for (const Triple& t : triples) {
    out << vocab.entities.label_of(t.head) << '\t'
        << vocab.relations.label_of(t.relation) << '\t'
        << vocab.entities.label_of(t.tail) << '\n';
  }
}

void write_id_triples(std::ostream& out, std::span<const Triple> triples) {
  out << triples.size() << '\n';
  for (const Triple& t : triples) {
    out << t.head << ' ' << t.tail << ' ' << t.relation << '\n';
  }
}

void write_label_ids(std::ostream& out, const LabelMap& labels) {
  out << labels.size() << '\n';
  for (std::size_t id = 0; id < labels.size(); ++id) {
    out << labels.labels()[id] << '\t' << id << '\n';
  }
}

DataFormat detect_format(const fs::path& dir) {
  if (fs::exists(dir / "train2id.txt")) return DataFormat::kIdFile;
  fs::path train = split_files(dir, DataFormat::kTsv).train;
  if (!fs::exists(train)) {
    throw ParseError("no training file found in " + dir.string(), 0);
  }
  std::ifstream in = open_in(train);
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (is_blank(line)) continue;
    auto tokens = split_whitespace(line);
    if (tokens.size() == 1 && line.find('\t') == std::string::npos &&
        tokens[0].find_first_not_of("0123456789") == std::string_view::npos) {
      return DataFormat::kIdFile;
    }
    return DataFormat::kTsv;
  }
  return DataFormat::kTsv;
}

LoadedDataset load_dataset(const fs::path& dir, DataFormat format) {
  if (format == DataFormat::kAuto) format = detect_format(dir);
  const SplitFiles files = split_files(dir, format);
  if (!fs::exists(files.train)) {
    throw ParseError("missing training file " + files.train.string(), 0);
  }

  const fs::path entity_vocab = dir / kEntityVocabFile;
  const fs::path relation_vocab = dir / kRelationVocabFile;
  const bool have_vocab = fs::exists(entity_vocab) && fs::exists(relation_vocab);
  Vocabulary vocab;
  if (have_vocab) {
    vocab.entities = with_file_context(entity_vocab, [&] {
      auto in = open_in(entity_vocab);
      return parse_label_ids(in);
    });
    vocab.relations = with_file_context(relation_vocab, [&] {
      auto in = open_in(relation_vocab);
      return parse_label_ids(in);
    });
  }

  LoadedDataset loaded;
  loaded.format = format;

  if (format == DataFormat::kTsv) {
    auto read = [&](const fs::path& p) {
      if (!fs::exists(p)) return std::vector<LabeledTriple>{};
      return with_file_context(p, [&] {
        auto in = open_in(p);
        return parse_tsv(in);
      });
    };
    LabeledSplits splits{read(files.train), read(files.valid), read(files.test)};
    IndexResult indexed = index_dataset(splits, have_vocab ? &vocab : nullptr);
    loaded.dataset = std::move(indexed.dataset);
    loaded.duplicates = indexed.duplicates();
    return loaded;
  }

  auto read = [&](const fs::path& p) {
    if (!fs::exists(p)) return std::vector<Triple>{};
    return with_file_context(p, [&] {
      auto in = open_in(p);
      return parse_id_triples(in);
    });
  };
  Dataset& ds = loaded.dataset;
  ds.train = read(files.train);
  ds.valid = read(files.valid);
  ds.test = read(files.test);
  if (!have_vocab) {
    // No label files: label every id by its decimal value.
    std::int32_t max_entity = -1, max_relation = -1;
    for (const auto* split : {&ds.train, &ds.valid, &ds.test}) {
      for (const Triple& t : *split) {
        max_entity = std::max({max_entity, t.head, t.tail});
        max_relation = std::max(max_relation, t.relation);
      }
    }
    for (std::int32_t i = 0; i <= max_entity; ++i) {
      vocab.entities.insert_new(std::to_string(i));
    }
    for (std::int32_t i = 0; i <= max_relation; ++i) {
      vocab.relations.insert_new(std::to_string(i));
    }
  }
  ds.vocab = std::move(vocab);
  for (auto* split : {&ds.train, &ds.valid, &ds.test}) {
    loaded.duplicates += deduplicate(*split);
  }
  try {
    validate_ids(ds);
  } catch (const std::out_of_range& e) {
    throw ParseError(dir.string() + ": " + e.what(), 0);
  }
  return loaded;
}

void write_dataset(const Dataset& dataset, const fs::path& dir,
                   DataFormat format) {
  fs::create_directories(dir);
  auto write_file = [&](const fs::path& path, auto&& body) {
    auto out = open_out(path);
    body(out);
    close_checked(out, path);
  };
  write_file(dir / kEntityVocabFile,
             [&](std::ostream& o) { write_label_ids(o, dataset.vocab.entities); });
  write_file(dir / kRelationVocabFile,
             [&](std::ostream& o) { write_label_ids(o, dataset.vocab.relations); });

  struct Split {
    const char* stem;
    const std::vector<Triple>* triples;
  };
  for (const Split& split : {Split{"train", &dataset.train},
                             Split{"valid", &dataset.valid},
                             Split{"test", &dataset.test}}) {
    if (format == DataFormat::kIdFile) {
      write_file(dir / (std::string(split.stem) + "2id.txt"),
                 [&](std::ostream& o) { write_id_triples(o, *split.triples); });
    } else {
      write_file(dir / (std::string(split.stem) + ".txt"), [&](std::ostream& o) {
        write_tsv(o, dataset.vocab, *split.triples);
      });
    }
  }
}

}  // namespace kgforge
