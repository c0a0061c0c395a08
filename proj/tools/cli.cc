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


#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgforge/bench.h"
#include "kgforge/checkpoint.h"
#include "kgforge/dataset_io.h"
#include "kgforge/errors.h"
#include "kgforge/evaluator.h"
#include "kgforge/graph.h"
#include "kgforge/models.h"
#include "kgforge/refiner.h"
#include "kgforge/trainer.h"
#include "kgforge/triple_index.h"

namespace kgforge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for flag combinations CLI11 cannot express; exits with kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string signed_delta(std::size_t before, std::size_t after) {
  const auto d = static_cast<long long>(after) - static_cast<long long>(before);
  return (d >= 0 ? "+" : "") + std::to_string(d);
}

LoadedDataset load(const std::string& dir, const std::string& format) {
  return load_dataset(dir, parse_format(format));
}

// Rebuilds a TrainConfig from the JSON written by to_json.
TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_array()) {
      for (const auto& item : value) text += (text.empty() ? "" : ",") + item.dump();
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else {
      text = value.dump();
    }
    set_config_value(c, key, text);
  }
  return c;
}

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---- refine ---------------------------------------------------------------

struct RefineArgs {
  std::string input;
  std::string output;
  std::string mode = "relation";
  std::string hierarchy;
  std::optional<int> threshold;
  std::optional<int> levels;
  std::optional<bool> exclude_last;
  std::vector<std::string> delimiters;
  std::string format = "auto";
  std::string output_format;
  std::string json_path;
};

int cmd_refine(const RefineArgs& a, Streams io) {
  const RefinementMode mode = parse_mode(a.mode);
  if (mode == RefinementMode::kEntityHierarchy && a.hierarchy.empty()) {
    throw UsageError("--mode entity requires --hierarchy FILE");
  }
  RefinementConfig config = RefinementConfig::for_mode(mode);
  if (a.threshold) config.threshold = *a.threshold;
  if (a.levels) config.levels = *a.levels;
  if (a.exclude_last) config.exclude_last = *a.exclude_last;
  if (!a.delimiters.empty()) config.delimiters = a.delimiters;
  config.validate();

  const LoadedDataset in = load(a.input, a.format);
  std::optional<HierarchyRecords> records;
  if (!a.hierarchy.empty()) records = load_hierarchy(a.hierarchy);
  const RefinementResult result =
      refine(in.dataset, config, records ? &*records : nullptr);

  const DataFormat out_format =
      a.output_format.empty() ? in.format : parse_format(a.output_format);
  write_refined(result, a.output, out_format == DataFormat::kAuto ? in.format : out_format);

  const RefinementReport& r = result.report;
  io.out << "kept components: " << r.kept.size() << '\n'
         << "entities:  " << r.stats_before.entities << " -> " << r.stats_after.entities
         << " (" << signed_delta(r.stats_before.entities, r.stats_after.entities) << ")\n"
         << "relations: " << r.stats_before.relations << " -> " << r.stats_after.relations
         << " (" << signed_delta(r.stats_before.relations, r.stats_after.relations) << ")\n"
         << "train:     " << r.stats_before.train << " -> " << r.stats_after.train << " ("
         << signed_delta(r.stats_before.train, r.stats_after.train) << ")\n";
  for (const auto& [label, n] : r.added_triples) {
    io.out << "  added " << label << ": " << n << '\n';
  }
  if (in.duplicates > 0) {
    io.err << "note: dropped " << in.duplicates << " duplicate input triples\n";
  }
  if (!a.json_path.empty()) write_text(a.json_path, to_json(r).dump(2) + "\n");
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string model = "transe";
  std::string config_file;
  std::string out;
  std::string history;
  std::string resume;
  std::string format = "auto";
  std::optional<std::size_t> dim;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> margin;
  std::optional<int> negatives;
  std::optional<std::string> optimizer;
  std::optional<int> valid_interval;
  std::optional<bool> constrain;
  int threads = 1;
  bool quiet = false;
};

TrainConfig build_train_config(const TrainArgs& a) {
  TrainConfig c;
  if (!a.config_file.empty()) {
    std::ifstream in(a.config_file);
    if (!in) throw std::runtime_error("cannot open " + a.config_file);
    parse_train_config(in, c);
  }
  // Flags override the file.
  if (a.dim) c.dim = *a.dim;
  if (a.seed) c.seed = *a.seed;
  if (a.epochs) set_config_value(c, "epochs", *a.epochs);
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (a.learning_rate) c.learning_rate = *a.learning_rate;
  if (a.margin) c.margin = *a.margin;
  if (a.negatives) c.negatives = *a.negatives;
  if (a.optimizer) set_config_value(c, "optimizer", *a.optimizer);
  if (a.valid_interval) c.valid_interval = *a.valid_interval;
  if (a.constrain) c.constrain_per_batch = *a.constrain;
  c.threads = a.threads;
  c.validate();
  return c;
}

int cmd_train(const TrainArgs& a, Streams io) {
  const ModelKind kind = parse_model(a.model);
  const TrainConfig config = build_train_config(a);
  const LoadedDataset loaded = load(a.data, a.format);
  const Dataset& ds = loaded.dataset;

  const fs::path history_path = a.history.empty() ? fs::path(a.out + ".history.jsonl")
                                                  : fs::path(a.history);
  if (history_path.has_parent_path()) fs::create_directories(history_path.parent_path());
  std::ofstream history(history_path, std::ios::binary | std::ios::trunc);
  if (!history) throw std::runtime_error("cannot write " + history_path.string());

  TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const EpochRecord& r) {
    history << to_json(r).dump() << '\n';
    if (!a.quiet && (r.valid_mrr || r.stats.epoch == 1)) {
      io.err << "epoch " << r.stats.epoch << "  loss " << fixed(r.stats.mean_loss, 6);
      if (r.valid_mrr) io.err << "  valid MRR " << fixed(*r.valid_mrr, 4);
      io.err << '\n';
    }
  };

  TrainResult result;
  if (!a.resume.empty()) {
    Checkpoint start = load_checkpoint(a.resume);
    if (start.params.kind != kind) {
      throw CheckpointError("checkpoint holds a " + std::string(model_name(start.params.kind)) +
                            " model, not " + std::string(model_name(kind)));
    }
    result = train(ds, std::move(start.params), config, callbacks);
  } else {
    result = train(ds, kind, config, callbacks);
  }
  history.close();

  Checkpoint ck{result.best, json::object()};
  ck.metadata["train_config"] = to_json(config);
  ck.metadata["best_epoch"] = result.best_epoch;
  ck.metadata["best_valid_mrr"] = result.best_valid_mrr;
  ck.metadata["dataset"] = to_json(dataset_stats(ds));
  save_checkpoint(a.out, ck);
  io.out << "best epoch " << result.best_epoch << " (valid MRR "
         << fixed(result.best_valid_mrr, 4) << ") written to " << a.out << '\n';
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::vector<std::string> filter_extra;
  std::string json_path;
  std::string split = "test";
  std::string sides = "both";
  std::string candidates = "all";
  std::string aux_prefix = "##attr:";
  std::vector<int> hits = {1, 3, 10};
  std::string format = "auto";
  bool raw = false;
  int threads = 1;
};

// Extra known triples, mapped into `vocab` by label. Triples naming labels
// the evaluated dataset does not know cannot be candidates and are skipped.
std::vector<Triple> map_extra(const Dataset& extra, const Vocabulary& vocab,
                              std::size_t& skipped) {
  std::vector<Triple> out;
  for (const auto* split : {&extra.train, &extra.valid, &extra.test}) {
    for (const Triple& t : *split) {
      const auto h = vocab.entities.find(extra.vocab.entities.label_of(t.head));
      const auto r = vocab.relations.find(extra.vocab.relations.label_of(t.relation));
      const auto tl = vocab.entities.find(extra.vocab.entities.label_of(t.tail));
      if (h && r && tl) {
        out.push_back({*h, *r, *tl});
      } else {
        ++skipped;
      }
    }
  }
  return out;
}

int cmd_eval(const EvalArgs& a, Streams io) {
  EvalConfig config;
  config.filtered = !a.raw;
  config.sides = parse_sides(a.sides);
  config.candidates = parse_candidate_policy(a.candidates);
  config.hits = a.hits;
  config.threads = a.threads;
  config.validate();

  const LoadedDataset loaded = load(a.data, a.format);
  const Dataset& ds = loaded.dataset;
  const Checkpoint ck = load_checkpoint(a.ckpt);
  validate_checkpoint(ck.params, dataset_stats(ds));

  const std::vector<Triple>* queries = nullptr;
  if (a.split == "test") {
    queries = &ds.test;
  } else if (a.split == "valid") {
    queries = &ds.valid;
  } else {
    throw UsageError("--split must be test or valid");
  }
  if (queries->empty()) throw std::runtime_error("the " + a.split + " split is empty");

  std::vector<bool> auxiliary(ds.num_entities(), false);
  std::size_t aux_count = 0;
  for (std::size_t e = 0; e < ds.num_entities(); ++e) {
    if (is_auxiliary_label(ds.vocab.entities.label_of(static_cast<EntityId>(e)),
                           a.aux_prefix)) {
      auxiliary[e] = true;
      ++aux_count;
    }
  }
  // Refinement never touches the evaluation splits.
  for (const Triple& t : *queries) {
    if (auxiliary[static_cast<std::size_t>(t.head)] ||
        auxiliary[static_cast<std::size_t>(t.tail)]) {
      throw std::runtime_error("evaluation triple " +
                               ds.vocab.entities.label_of(t.head) + " / " +
                               ds.vocab.entities.label_of(t.tail) +
                               " involves an auxiliary entity");
    }
  }
  config.auxiliary = auxiliary;

  std::vector<std::vector<Triple>> extras;
  std::size_t skipped = 0;
  for (const auto& dir : a.filter_extra) {
    extras.push_back(map_extra(load(dir, "auto").dataset, ds.vocab, skipped));
  }
  std::vector<std::span<const Triple>> lists = {ds.train, ds.valid, ds.test};
  for (const auto& e : extras) lists.emplace_back(e);
  const TripleIndex filter(lists);

  const Metrics metrics = evaluate(ck.params, *queries, &filter, config);
  io.out << model_name(ck.params.kind) << " on " << queries->size() << " " << a.split
         << " triples (" << (config.filtered ? "filtered" : "raw") << ", "
         << sides_name(config.sides) << " sides, " << ds.num_entities() << " entities";
  if (aux_count > 0) io.out << ", " << aux_count << " auxiliary";
  io.out << ")\n" << format_metrics(metrics);
  if (skipped > 0) {
    io.err << "note: " << skipped << " extra filter triples use unknown labels; skipped\n";
  }

  if (!a.json_path.empty()) {
    json j = to_json(metrics);
    j["model"] = model_name(ck.params.kind);
    j["split"] = a.split;
    j["filtered"] = config.filtered;
    if (ck.metadata.contains("train_config")) j["train_config"] = ck.metadata["train_config"];
    write_text(a.json_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

// ---- compare --------------------------------------------------------------

struct CompareArgs {
  std::string baseline;
  std::string refined;
  std::string json_path;
  std::string baseline_name = "baseline";
  std::string refined_name = "refined";
  bool skip_config_check = false;
};

int cmd_compare(const CompareArgs& a, Streams io) {
  const json base = read_json(a.baseline);
  const json ref = read_json(a.refined);
  if (!a.skip_config_check) {
    if (!base.contains("train_config") || !ref.contains("train_config")) {
      throw std::runtime_error(
          "metrics files lack train_config; pass --skip-config-check to compare anyway");
    }
    try {
      require_same_hyperparameters(config_from_json(base["train_config"]),
                                   config_from_json(ref["train_config"]));
    } catch (const ConfigError& e) {
      // A data problem here, not a flag problem.
      throw std::runtime_error(e.what());
    }
  }
  const Comparison cmp = compare_runs(metrics_from_json(base), metrics_from_json(ref));
  io.out << format_comparison(cmp, a.baseline_name, a.refined_name);
  if (!a.json_path.empty()) write_text(a.json_path, to_json(cmp).dump(2) + "\n");
  return kExitOk;
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
  std::string data;
  std::string format = "auto";
  std::string json_path;
};

int cmd_stats(const StatsArgs& a, Streams io) {
  const LoadedDataset loaded = load(a.data, a.format);
  const json j = to_json(dataset_stats(loaded.dataset));
  io.out << j.dump() << '\n';
  if (loaded.duplicates > 0) {
    io.err << "note: dropped " << loaded.duplicates << " duplicate triples\n";
  }
  if (!a.json_path.empty()) write_text(a.json_path, j.dump(2) + "\n");
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string data;
  std::vector<std::string> models = {"transe", "transh", "transd", "rotate"};
  std::size_t dim = 200;
  int epochs = 1;
  int batch_size = 1024;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string format = "auto";
  std::string json_path;
};

int cmd_bench(const BenchArgs& a, Streams io) {
  TrainConfig config;
  config.dim = a.dim;
  config.batch_size = a.batch_size;
  config.threads = a.threads;
  config.seed = a.seed;
  config.validate();
  const LoadedDataset loaded = load(a.data, a.format);

  json results = json::array();
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %6s %14s %16s %20s\n", "model", "dim",
                "s/epoch", "scores/s", "published s/epoch");
  io.out << line;
  for (const auto& name : a.models) {
    const ModelKind kind = parse_model(name);
    const BenchResult r = bench_model(loaded.dataset, kind, config, a.epochs);
    const auto published = published_epoch_seconds(kind);
    std::snprintf(line, sizeof(line), "%-8s %6zu %14.3f %16.4g %20s\n",
                  std::string(model_name(kind)).c_str(), r.dim, r.mean_epoch_seconds,
                  r.scores_per_second, published ? fixed(*published, 1).c_str() : "-");
    io.out << line;
    results.push_back(to_json(r));
  }
  io.out << "published figures: FB15k237, d = 200, Nvidia K80\n";
  if (!a.json_path.empty()) {
    write_text(a.json_path,
               json{{"train_triples", loaded.dataset.train.size()}, {"results", results}}
                       .dump(2) +
                   "\n");
  }
  return kExitOk;
}

int default_threads() {
  const char* env = std::getenv("KGFORGE_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"kgforge: knowledge graph refinement and translational embeddings"};
  app.name("kgforge");
  app.require_subcommand(1, 1);
  const int env_threads = default_threads();

  RefineArgs ra;
  auto* refine_cmd = app.add_subcommand("refine", "Add hierarchy auxiliary nodes to a dataset");
  refine_cmd->add_option("--input", ra.input, "Dataset directory")->required();
  refine_cmd->add_option("--output", ra.output, "Output directory")->required();
  refine_cmd->add_option("--mode", ra.mode, "relation or entity")
      ->check(CLI::IsMember({"relation", "entity"}));
  refine_cmd->add_option("--hierarchy", ra.hierarchy, "Hierarchy file (entity mode)");
  refine_cmd->add_option("--threshold", ra.threshold, "Minimum component count");
  refine_cmd->add_option("--levels", ra.levels, "Hierarchy levels kept");
  refine_cmd->add_flag("--exclude-last,!--keep-last", ra.exclude_last,
                       "Drop the final path component first");
  refine_cmd->add_option("--delimiter", ra.delimiters, "Path delimiter (repeatable)");
  refine_cmd->add_option("--format", ra.format, "auto, tsv or idfile");
  refine_cmd->add_option("--output-format", ra.output_format, "Defaults to the input format");
  refine_cmd->add_option("--json", ra.json_path, "Also write the report here");

  TrainArgs ta;
  ta.threads = env_threads;
  auto* train_cmd = app.add_subcommand("train", "Train an embedding model");
  train_cmd->add_option("--data", ta.data, "Dataset directory")->required();
  train_cmd->add_option("--model", ta.model, "transe, transh, transd, transr or rotate");
  train_cmd->add_option("--config", ta.config_file, "key = value config file");
  train_cmd->add_option("--out", ta.out, "Checkpoint path")->required();
  train_cmd->add_option("--history", ta.history, "History JSONL (default <out>.history.jsonl)");
  train_cmd->add_option("--resume", ta.resume, "Start from this checkpoint");
  train_cmd->add_option("--format", ta.format, "auto, tsv or idfile");
  train_cmd->add_option("--dim", ta.dim);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--epochs", ta.epochs, "Candidate epochs, comma separated");
  train_cmd->add_option("--batch-size", ta.batch_size);
  train_cmd->add_option("--lr", ta.learning_rate);
  train_cmd->add_option("--margin", ta.margin);
  train_cmd->add_option("--negatives", ta.negatives);
  train_cmd->add_option("--optimizer", ta.optimizer, "sgd or adagrad");
  train_cmd->add_option("--valid-interval", ta.valid_interval);
  train_cmd->add_flag("--constrain,!--no-constrain", ta.constrain);
  train_cmd->add_option("--threads", ta.threads)->envname("KGFORGE_THREADS");
  train_cmd->add_flag("--quiet", ta.quiet);

  EvalArgs ea;
  ea.threads = env_threads;
  auto* eval_cmd = app.add_subcommand("eval", "Filtered link prediction metrics");
  eval_cmd->add_option("--data", ea.data, "Dataset directory")->required();
  eval_cmd->add_option("--ckpt", ea.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--filter-extra", ea.filter_extra,
                       "Dataset whose triples join the filter (repeatable)");
  eval_cmd->add_option("--json", ea.json_path, "Write metrics JSON");
  eval_cmd->add_option("--split", ea.split, "test or valid");
  eval_cmd->add_option("--sides", ea.sides, "head, tail or both");
  eval_cmd->add_option("--candidates", ea.candidates, "all or exclude-auxiliary");
  eval_cmd->add_option("--aux-prefix", ea.aux_prefix, "Auxiliary entity label prefix");
  eval_cmd->add_option("--hits", ea.hits, "Hits@k thresholds")->delimiter(',');
  eval_cmd->add_option("--format", ea.format, "auto, tsv or idfile");
  eval_cmd->add_flag("--raw", ea.raw, "Unfiltered ranking");
  eval_cmd->add_option("--threads", ea.threads)->envname("KGFORGE_THREADS");

  CompareArgs ca;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two metrics files");
  compare_cmd->add_option("--baseline", ca.baseline, "Baseline metrics JSON")->required();
  compare_cmd->add_option("--refined", ca.refined, "Refined metrics JSON")->required();
  compare_cmd->add_option("--json", ca.json_path, "Write the comparison JSON");
  compare_cmd->add_option("--baseline-name", ca.baseline_name);
  compare_cmd->add_option("--refined-name", ca.refined_name);
  compare_cmd->add_flag("--skip-config-check", ca.skip_config_check,
                        "Allow runs trained with different hyperparameters");

  StatsArgs sa;
  auto* stats_cmd = app.add_subcommand("stats", "Entity, relation and split counts");
  stats_cmd->add_option("--data", sa.data, "Dataset directory")->required();
  stats_cmd->add_option("--format", sa.format, "auto, tsv or idfile");
  stats_cmd->add_option("--json", sa.json_path, "Also write the JSON here");

  BenchArgs ba;
  ba.threads = env_threads;
  auto* bench_cmd = app.add_subcommand("bench", "Time training epochs");
  bench_cmd->add_option("--data", ba.data, "Dataset directory")->required();
  bench_cmd->add_option("--model", ba.models, "Models to time (repeatable)");
  bench_cmd->add_option("--dim", ba.dim);
  bench_cmd->add_option("--epochs", ba.epochs);
  bench_cmd->add_option("--batch-size", ba.batch_size);
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--format", ba.format, "auto, tsv or idfile");
  bench_cmd->add_option("--json", ba.json_path, "Write results JSON");
  bench_cmd->add_option("--threads", ba.threads)->envname("KGFORGE_THREADS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Streams io{out, err};
  try {
    if (*refine_cmd) return cmd_refine(ra, io);
    if (*train_cmd) return cmd_train(ta, io);
    if (*eval_cmd) return cmd_eval(ea, io);
    if (*compare_cmd) return cmd_compare(ca, io);
    if (*stats_cmd) return cmd_stats(sa, io);
    if (*bench_cmd) return cmd_bench(ba, io);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace kgforge::cli
