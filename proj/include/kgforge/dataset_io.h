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


#ifndef KGFORGE_DATASET_IO_H_
#define KGFORGE_DATASET_IO_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgforge/graph.h"

namespace kgforge {

// tsv: `head<TAB>relation<TAB>tail` per line, no header.
// idfile: first line is the triple count, then `head tail relation` per line,
// with companion entity2id.txt / relation2id.txt (`count`, then label<TAB>id).
enum class DataFormat { kAuto, kTsv, kIdFile };

DataFormat parse_format(std::string_view name);
std::string_view format_name(DataFormat format);

// Parsers throw ParseError carrying the 1-based line number. Blank lines are
// skipped in TSV input.
std::vector<LabeledTriple> parse_tsv(std::istream& in);
std::vector<Triple> parse_id_triples(std::istream& in);
LabelMap parse_label_ids(std::istream& in);

void write_tsv(std::ostream& out, std::span<const LabeledTriple> triples);
void write_tsv(std::ostream& out, const Vocabulary& vocab,
               std::span<const Triple> triples);
void write_id_triples(std::ostream& out, std::span<const Triple> triples);
void write_label_ids(std::ostream& out, const LabelMap& labels);

// Picks the format of a dataset directory by probing the first line of its
// training file. Throws ParseError when no training file is found.
DataFormat detect_format(const std::filesystem::path& dir);

struct LoadedDataset {
  Dataset dataset;
  DataFormat format = DataFormat::kTsv;
  std::size_t duplicates = 0;
};

// Loads train/valid/test from `dir`. When entity2id.txt and relation2id.txt
// exist they fix the ids; otherwise ids follow first appearance. A missing
// valid or test file is read as an empty split.
LoadedDataset load_dataset(const std::filesystem::path& dir,
                           DataFormat format = DataFormat::kAuto);

// Writes the three splits plus vocabulary files, so that load_dataset
// reproduces `dataset` exactly. kAuto is treated as kTsv.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                   DataFormat format);

}  // namespace kgforge

#endif  // KGFORGE_DATASET_IO_H_
