// Copyright 2026 The embshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Config-driven grid runner: models x tasks x layer sets x combine weights x
// aggregations x post-processing chains, one report row per cell.

#ifndef EMBSHAPE_EXPERIMENT_H_
#define EMBSHAPE_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embshape/evaluate.h"
#include "embshape/models.h"

namespace embshape {

enum class ModelKind { kDump, kRandom, kAvg, kWord2Vec, kCombine };
enum class TaskKind {
  kSts,
  kCluster,
  kClassify,
  kClassifyPairs,
  kIsoScore,
  kAlignment,
  kUniformity,
};
enum class DataFormat { kPairs, kLabeled, kCorpus };

std::string_view model_kind_name(ModelKind kind);
std::string_view task_kind_name(TaskKind kind);
MetricKind task_metric(TaskKind kind);

struct ModelConfig {
  std::string name;
  ModelKind kind = ModelKind::kDump;
  // kDump: one dump per task name, plus an optional corpus dump for
  // corpus-fitted steps.
  std::map<std::string, std::string> dumps;
  std::string corpus_dump;
  // kRandom.
  std::vector<std::uint64_t> seeds;
  std::size_t dim = 768;
  // kAvg: a prebuilt STT1 table, or a dump to average per layer set.
  // kWord2Vec: a word2vec text file.
  std::string table;
  std::string source_dump;
  std::size_t filter_top = 0;
  // kCombine: names of the contextual and the averaged model.
  std::string contextual;
  std::string averaged;

  // Whether the model's vectors depend on the layer set / combine weight.
  bool uses_layers() const;
  bool uses_weight() const { return kind == ModelKind::kCombine; }
};

struct TaskConfig {
  std::string name;
  TaskKind kind = TaskKind::kSts;
  std::string data;
  DataFormat format = DataFormat::kPairs;
  std::size_t min_chars = 0;  // kCorpus only
  int runs = 10;              // k-means restarts
  int folds = 10;
  bool normalize = true;      // alignment / uniformity
};

struct CorpusConfig {
  std::string path;  // raw text for idf^W statistics and static-model vectors
  std::size_t min_chars = 10;
  std::size_t max_sentences = 0;  // 0 keeps all
};

struct ExperimentConfig {
  std::string vocab;
  std::string stoplist;
  std::size_t frequent_tokens = kDefaultFrequentTokens;
  CorpusConfig corpus;
  std::vector<ModelConfig> models;
  std::vector<TaskConfig> tasks;
  std::vector<std::string> aggregations = {"avg"};
  std::vector<std::string> post = {"none"};
  std::vector<std::vector<int>> layer_sets = {{12}};
  std::vector<double> weights;
  std::uint64_t seed = 0;  // k-means and cross-validation
  double l2 = SoftmaxOptions{}.l2;
  std::string output;
  std::string markdown;
  int workers = 0;  // 0 uses default_worker_count()

  // Relative paths resolve against `base_dir`. Throws ConfigError.
  static ExperimentConfig parse(std::string_view json_text,
                                const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);

  const ModelConfig& model(std::string_view name) const;
  const TaskConfig& task(std::string_view name) const;

  // Structure, names, grammar of every spec and existence of every path.
  void validate() const;
};

// One grid point. The provenance string holds every field, so a cell can be
// rebuilt from a report row and its config.
struct CellSpec {
  std::string model;
  std::string task;
  std::string aggregation;
  std::string post;
  std::vector<int> layers;
  std::optional<double> weight;
  std::uint64_t seed = 0;

  std::string provenance() const;
  static CellSpec from_provenance(std::string_view text);
  bool operator==(const CellSpec&) const = default;
};

struct CellResult {
  CellSpec cell;
  MetricKind metric = MetricKind::kSpearman;
  std::optional<EvalReport> report;
  std::string error;  // set iff report is empty

  bool ok() const { return report.has_value(); }
};

// Cells in grid order: task, model, layer set, weight, aggregation, post.
std::vector<CellSpec> expand_grid(const ExperimentConfig& config);

class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  ~Experiment();
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const ExperimentConfig& config() const { return config_; }

  // Failures become error results rather than exceptions.
  CellResult run_cell(const CellSpec& cell) const;
  // Results in grid order whatever the worker count.
  std::vector<CellResult> run(int workers = 0) const;

  // Shared, lazily loaded inputs (vocabulary, datasets, dumps, tables).
  struct Resources;

 private:
  ExperimentConfig config_;
  std::unique_ptr<Resources> resources_;
};

// "task,metric,value,stddev,runs,provenance" with one row per result.
// Throws InvalidArgument on an empty result set.
std::string format_csv(const std::vector<CellResult>& results);
// One table per task: methods as rows, models as columns.
std::string format_markdown(const std::vector<CellResult>& results);

struct CsvRow {
  std::string task;
  std::string metric;
  std::string value;
  std::string stddev;
  std::string runs;
  std::string provenance;
};
std::vector<CsvRow> parse_csv(std::string_view text);

}  // namespace embshape

#endif  // EMBSHAPE_EXPERIMENT_H_
