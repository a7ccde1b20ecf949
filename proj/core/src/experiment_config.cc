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

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "embshape/aggregate.h"
#include "embshape/experiment.h"
#include "embshape/postprocess.h"

namespace embshape {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr std::pair<ModelKind, std::string_view> kModelKinds[] = {
    {ModelKind::kDump, "dump"},         {ModelKind::kRandom, "random"},
    {ModelKind::kAvg, "avg"},           {ModelKind::kWord2Vec, "word2vec"},
    {ModelKind::kCombine, "combine"},
};

constexpr std::pair<TaskKind, std::string_view> kTaskKinds[] = {
    {TaskKind::kSts, "sts"},
    {TaskKind::kCluster, "cluster"},
    {TaskKind::kClassify, "classify"},
    {TaskKind::kClassifyPairs, "classify_pairs"},
    {TaskKind::kIsoScore, "isoscore"},
    {TaskKind::kAlignment, "alignment"},
    {TaskKind::kUniformity, "uniformity"},
};

constexpr std::pair<DataFormat, std::string_view> kFormats[] = {
    {DataFormat::kPairs, "pairs"},
    {DataFormat::kLabeled, "labeled"},
    {DataFormat::kCorpus, "corpus"},
};

template <typename E, std::size_t N>
E lookup(const std::pair<E, std::string_view> (&table)[N], std::string_view key,
         std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == key) return value;
  }
  throw ConfigError(fmt::format("config: unknown {} '{}'", what, key));
}

// Rejects keys outside `allowed` so typos do not pass silently.
void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) {
    throw ConfigError(fmt::format("config: {} must be an object", where));
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("config: unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: key '{}': {}", key, e.what()));
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

DataFormat default_format(TaskKind kind) {
  switch (kind) {
    case TaskKind::kCluster:
    case TaskKind::kClassify:
      return DataFormat::kLabeled;
    case TaskKind::kIsoScore:
    case TaskKind::kUniformity:
      return DataFormat::kCorpus;
    default:
      return DataFormat::kPairs;
  }
}

void check_name(const std::string& name, std::string_view what) {
  if (name.empty()) throw ConfigError(fmt::format("config: {} without a name", what));
  if (name.find_first_of(";=,|\t\r\n\"") != std::string::npos) {
    throw ConfigError(fmt::format(
        "config: {} name '{}' contains a reserved character", what, name));
  }
}

void check_path(const std::string& path, std::string_view what) {
  if (!path.empty() && !fs::exists(path)) {
    throw ConfigError(fmt::format("config: {} '{}' does not exist", what, path));
  }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  for (const auto& [k, name] : kModelKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::string_view task_kind_name(TaskKind kind) {
  for (const auto& [k, name] : kTaskKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

MetricKind task_metric(TaskKind kind) {
  switch (kind) {
    case TaskKind::kSts:
      return MetricKind::kSpearman;
    case TaskKind::kCluster:
      return MetricKind::kClusterAccuracy;
    case TaskKind::kClassify:
    case TaskKind::kClassifyPairs:
      return MetricKind::kClassifyAccuracy;
    case TaskKind::kIsoScore:
      return MetricKind::kIsoScore;
    case TaskKind::kAlignment:
      return MetricKind::kAlignment;
    case TaskKind::kUniformity:
      return MetricKind::kUniformity;
  }
  return MetricKind::kSpearman;
}

bool ModelConfig::uses_layers() const {
  switch (kind) {
    case ModelKind::kDump:
    case ModelKind::kCombine:
      return true;
    case ModelKind::kAvg:
      return !source_dump.empty();
    default:
      return false;
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view json_text,
                                         const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: invalid JSON: {}", e.what()));
  }
  check_keys(root,
             {"vocab", "stoplist", "frequent_tokens", "corpus", "models",
              "tasks", "aggregations", "post", "layers", "weights", "seed",
              "l2", "output", "markdown", "workers"},
             "config");
  ExperimentConfig c;
  c.vocab = resolve(base_dir, get_or<std::string>(root, "vocab", ""));
  c.stoplist = resolve(base_dir, get_or<std::string>(root, "stoplist", ""));
  c.frequent_tokens =
      get_or<std::size_t>(root, "frequent_tokens", kDefaultFrequentTokens);
  if (auto it = root.find("corpus"); it != root.end()) {
    check_keys(*it, {"path", "min_chars", "max_sentences"}, "corpus");
    c.corpus.path = resolve(base_dir, get_or<std::string>(*it, "path", ""));
    c.corpus.min_chars = get_or<std::size_t>(*it, "min_chars", 10);
    c.corpus.max_sentences = get_or<std::size_t>(*it, "max_sentences", 0);
  }
  for (const json& m : get_or<json>(root, "models", json::array())) {
    check_keys(m,
               {"name", "kind", "dumps", "corpus_dump", "seeds", "dim", "table",
                "source_dump", "filter_top", "contextual", "averaged"},
               "model");
    ModelConfig mc;
    mc.name = get_or<std::string>(m, "name", "");
    mc.kind = lookup(kModelKinds, get_or<std::string>(m, "kind", ""),
                     "model kind");
    for (const auto& [task, path] :
         get_or<std::map<std::string, std::string>>(m, "dumps", {})) {
      mc.dumps[task] = resolve(base_dir, path);
    }
    mc.corpus_dump = resolve(base_dir, get_or<std::string>(m, "corpus_dump", ""));
    mc.seeds = get_or<std::vector<std::uint64_t>>(m, "seeds", {});
    mc.dim = get_or<std::size_t>(m, "dim", 768);
    mc.table = resolve(base_dir, get_or<std::string>(m, "table", ""));
    mc.source_dump = resolve(base_dir, get_or<std::string>(m, "source_dump", ""));
    mc.filter_top = get_or<std::size_t>(m, "filter_top", 0);
    mc.contextual = get_or<std::string>(m, "contextual", "");
    mc.averaged = get_or<std::string>(m, "averaged", "");
    c.models.push_back(std::move(mc));
  }
  for (const json& t : get_or<json>(root, "tasks", json::array())) {
    check_keys(t,
               {"name", "kind", "data", "format", "min_chars", "runs", "folds",
                "normalize"},
               "task");
    TaskConfig tc;
    tc.name = get_or<std::string>(t, "name", "");
    tc.kind = lookup(kTaskKinds, get_or<std::string>(t, "kind", ""), "task kind");
    tc.data = resolve(base_dir, get_or<std::string>(t, "data", ""));
    tc.format = default_format(tc.kind);
    if (t.contains("format")) {
      tc.format = lookup(kFormats, get_or<std::string>(t, "format", ""),
                         "data format");
    }
    tc.min_chars = get_or<std::size_t>(t, "min_chars", 0);
    tc.runs = get_or<int>(t, "runs", 10);
    tc.folds = get_or<int>(t, "folds", 10);
    tc.normalize = get_or<bool>(t, "normalize", true);
    c.tasks.push_back(std::move(tc));
  }
  c.aggregations = get_or<std::vector<std::string>>(root, "aggregations", {"avg"});
  c.post = get_or<std::vector<std::string>>(root, "post", {"none"});
  if (auto it = root.find("layers"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("config: 'layers' must be a list");
    c.layer_sets.clear();
    for (const json& entry : *it) {
      if (entry.is_string()) {
        c.layer_sets.push_back(parse_layers(entry.get<std::string>()));
      } else if (entry.is_number_integer()) {
        c.layer_sets.push_back({entry.get<int>()});
      } else if (entry.is_array()) {
        try {
          c.layer_sets.push_back(entry.get<std::vector<int>>());
        } catch (const json::exception& e) {
          throw ConfigError(fmt::format("config: 'layers': {}", e.what()));
        }
      } else {
        throw ConfigError("config: 'layers' entries must be strings or lists");
      }
    }
  }
  c.weights = get_or<std::vector<double>>(root, "weights", {});
  c.seed = get_or<std::uint64_t>(root, "seed", 0);
  c.l2 = get_or<double>(root, "l2", SoftmaxOptions{}.l2);
  c.output = resolve(base_dir, get_or<std::string>(root, "output", ""));
  c.markdown = resolve(base_dir, get_or<std::string>(root, "markdown", ""));
  c.workers = get_or<int>(root, "workers", 0);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string base = fs::path(path).parent_path().string();
  return parse(buffer.str(), base.empty() ? "." : base);
}

const ModelConfig& ExperimentConfig::model(std::string_view name) const {
  for (const ModelConfig& m : models) {
    if (m.name == name) return m;
  }
  throw ConfigError(fmt::format("config: no model named '{}'", name));
}

const TaskConfig& ExperimentConfig::task(std::string_view name) const {
  for (const TaskConfig& t : tasks) {
    if (t.name == name) return t;
  }
  throw ConfigError(fmt::format("config: no task named '{}'", name));
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw ConfigError("config: no models");
  if (tasks.empty()) throw ConfigError("config: no tasks");
  if (aggregations.empty()) throw ConfigError("config: empty aggregation grid");
  if (post.empty()) throw ConfigError("config: empty post-processing grid");
  if (layer_sets.empty()) throw ConfigError("config: empty layer grid");
  if (l2 < 0.0) throw ConfigError("config: l2 must be non-negative");
  for (const std::string& a : aggregations) parse_aggregation(a);
  for (const std::string& p : post) parse_post_chain(p);
  for (const auto& layers : layer_sets) {
    AggregationSpec probe;
    probe.layers = layers;
    probe.validate();
  }
  check_path(vocab, "vocab");
  check_path(stoplist, "stoplist");
  check_path(corpus.path, "corpus");

  std::set<std::string> names;
  for (const TaskConfig& t : tasks) {
    check_name(t.name, "task");
    if (!names.insert("task:" + t.name).second) {
      throw ConfigError(fmt::format("config: duplicate task '{}'", t.name));
    }
    if (t.data.empty()) {
      throw ConfigError(fmt::format("config: task '{}' has no data", t.name));
    }
    check_path(t.data, "task data");
    if (t.runs < 1) throw ConfigError("config: task runs must be at least 1");
    if (t.folds < 2) throw ConfigError("config: task folds must be at least 2");
    bool needs_pairs = t.kind == TaskKind::kSts ||
                       t.kind == TaskKind::kClassifyPairs ||
                       t.kind == TaskKind::kAlignment;
    bool needs_labels =
        t.kind == TaskKind::kCluster || t.kind == TaskKind::kClassify;
    if ((needs_pairs && t.format != DataFormat::kPairs) ||
        (needs_labels && t.format != DataFormat::kLabeled)) {
      throw ConfigError(fmt::format(
          "config: task '{}' of kind {} cannot use that data format", t.name,
          task_kind_name(t.kind)));
    }
  }
  bool any_combine = false;
  for (const ModelConfig& m : models) {
    check_name(m.name, "model");
    if (!names.insert("model:" + m.name).second) {
      throw ConfigError(fmt::format("config: duplicate model '{}'", m.name));
    }
    for (const auto& [task, path] : m.dumps) {
      this->task(task);
      check_path(path, "dump");
    }
    check_path(m.corpus_dump, "corpus dump");
    check_path(m.table, "static table");
    check_path(m.source_dump, "source dump");
    auto need_vocab = [&] {
      if (vocab.empty()) {
        throw ConfigError(fmt::format(
            "config: model '{}' tokenizes text and needs a vocab", m.name));
      }
    };
    switch (m.kind) {
      case ModelKind::kDump:
        need_vocab();
        if (m.dumps.empty()) {
          throw ConfigError(fmt::format("config: model '{}' lists no dumps", m.name));
        }
        break;
      case ModelKind::kRandom:
        need_vocab();
        if (m.seeds.empty() || m.dim == 0) {
          throw ConfigError(fmt::format(
              "config: random model '{}' needs seeds and a positive dim", m.name));
        }
        break;
      case ModelKind::kAvg:
        need_vocab();
        if (m.table.empty() == m.source_dump.empty()) {
          throw ConfigError(fmt::format(
              "config: avg model '{}' needs exactly one of table and "
              "source_dump",
              m.name));
        }
        break;
      case ModelKind::kWord2Vec:
        if (m.table.empty()) {
          throw ConfigError(fmt::format(
              "config: word2vec model '{}' needs a table path", m.name));
        }
        break;
      case ModelKind::kCombine:
        any_combine = true;
        break;
    }
  }
  for (const ModelConfig& m : models) {
    if (m.kind != ModelKind::kCombine) continue;
    if (model(m.contextual).kind != ModelKind::kDump) {
      throw ConfigError(fmt::format(
          "config: combine model '{}' needs a dump model as contextual", m.name));
    }
    if (model(m.averaged).kind != ModelKind::kAvg) {
      throw ConfigError(fmt::format(
          "config: combine model '{}' needs an avg model as averaged", m.name));
    }
  }
  if (any_combine && weights.empty()) {
    throw ConfigError("config: combine models need a non-empty weight grid");
  }
}

// --- cells ---

std::string CellSpec::provenance() const {
  return fmt::format("model={};task={};agg={};post={};layers={};w={};seed={}",
                     model, task, aggregation, post, format_layers(layers),
                     weight ? fmt::format("{}", *weight) : std::string(), seed);
}

CellSpec CellSpec::from_provenance(std::string_view text) {
  CellSpec cell;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view field = text.substr(start, end - start);
    start = end + 1;
    std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(fmt::format("provenance: field '{}' has no '='", field));
    }
    std::string key(field.substr(0, eq));
    std::string value(field.substr(eq + 1));
    seen.insert(key);
    if (key == "model") {
      cell.model = value;
    } else if (key == "task") {
      cell.task = value;
    } else if (key == "agg") {
      cell.aggregation = value;
    } else if (key == "post") {
      cell.post = value;
    } else if (key == "layers") {
      cell.layers = parse_layers(value);
    } else if (key == "w") {
      if (!value.empty()) {
        double w = 0.0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), w);
        if (ec != std::errc() || p != value.data() + value.size()) {
          throw FormatError(fmt::format("provenance: bad weight '{}'", value));
        }
        cell.weight = w;
      }
    } else if (key == "seed") {
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                     cell.seed);
      if (ec != std::errc() || p != value.data() + value.size()) {
        throw FormatError(fmt::format("provenance: bad seed '{}'", value));
      }
    }
    // Other keys (model seeds, errors) are informational.
  }
  for (const char* key : {"model", "task", "agg", "post", "layers", "w", "seed"}) {
    if (!seen.contains(key)) {
      throw FormatError(fmt::format("provenance: missing field '{}'", key));
    }
  }
  return cell;
}

std::vector<CellSpec> expand_grid(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  for (const TaskConfig& task : config.tasks) {
    for (const ModelConfig& model : config.models) {
      std::vector<std::vector<int>> layer_sets =
          model.uses_layers() ? config.layer_sets
                              : std::vector<std::vector<int>>{{kStaticLayer}};
      std::vector<std::optional<double>> weights = {std::nullopt};
      if (model.uses_weight()) {
        weights.assign(config.weights.begin(), config.weights.end());
      }
      for (const auto& layers : layer_sets) {
        for (const auto& w : weights) {
          for (const std::string& agg : config.aggregations) {
            for (const std::string& post : config.post) {
              cells.push_back(CellSpec{model.name, task.name, agg, post, layers,
                                       w, config.seed});
            }
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace embshape
