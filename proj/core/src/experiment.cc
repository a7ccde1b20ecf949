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

#include "embshape/experiment.h"

#include <cmath>
#include <fstream>
#include <future>
#include <mutex>

#include <fmt/core.h>

#include "embshape/aggregate.h"
#include "embshape/postprocess.h"
#include "embshape/random_embed.h"
#include "embshape/stats.h"
#include "embshape/tokenize.h"

namespace embshape {

namespace {

// Computes each key at most once, even under concurrent requests.
template <typename V>
class OnceCache {
 public:
  template <typename F>
  std::shared_ptr<const V> get(const std::string& key, F&& make) {
    std::promise<std::shared_ptr<const V>> promise;
    std::shared_future<std::shared_ptr<const V>> future;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        future = promise.get_future().share();
        entries_.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const V>(make()));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::shared_ptr<const V>>> entries_;
};

struct TaskData {
  std::vector<std::string> texts;
  std::optional<SentencePairSet> pairs;
  std::optional<LabeledTextSet> labeled;
};

using IdLists = std::vector<std::vector<TokenId>>;

// Token-level context of a model: which vocabulary its ids come from.
struct Lexicon {
  std::string key;  // cache namespace
  const Vocabulary* vocab = nullptr;
  bool word_level = false;
};

std::vector<TokenId> ids_of(const Lexicon& lex, const std::string& text) {
  return lex.word_level ? tokenize_words(text, *lex.vocab)
                        : tokenize(text, *lex.vocab);
}

IdLists tensor_ids(const EmbeddingTensor& tensor) {
  IdLists out;
  out.reserve(tensor.sentence_count());
  for (const SentenceRecord& r : tensor.sentences()) out.push_back(r.token_ids);
  return out;
}

}  // namespace

struct Experiment::Resources {
  const ExperimentConfig& config;

  OnceCache<Vocabulary> vocab;
  OnceCache<std::vector<std::string>> corpus_texts;
  OnceCache<IdLists> id_lists;
  OnceCache<TokenStats> stats;
  OnceCache<TokenClassFlags> flags;
  OnceCache<TaskData> tasks;
  OnceCache<EmbeddingTensor> dumps;
  OnceCache<StaticTable> tables;

  explicit Resources(const ExperimentConfig& c) : config(c) {}

  const Vocabulary& wordpiece() {
    if (config.vocab.empty()) throw ConfigError("no vocab configured");
    return *vocab.get("", [&] { return Vocabulary::load_wordpiece(config.vocab); });
  }

  Lexicon wordpiece_lexicon() { return Lexicon{"wp", &wordpiece(), false}; }

  std::shared_ptr<const TaskData> task(const TaskConfig& t) {
    return tasks.get(t.name, [&] {
      TaskData data;
      switch (t.format) {
        case DataFormat::kPairs:
          data.pairs = read_pair_tsv_file(t.data);
          data.texts = data.pairs->sentences;
          break;
        case DataFormat::kLabeled:
          data.labeled = read_labeled_tsv_file(t.data);
          data.texts = data.labeled->texts;
          break;
        case DataFormat::kCorpus:
          data.texts = read_corpus_sentences_file(t.data, t.min_chars);
          break;
      }
      if (data.texts.empty()) {
        throw ConfigError(fmt::format("task '{}' has no texts", t.name));
      }
      return data;
    });
  }

  std::shared_ptr<const std::vector<std::string>> corpus() {
    if (config.corpus.path.empty()) {
      throw ConfigError("corpus-based statistics or fitting need corpus.path");
    }
    return corpus_texts.get("", [&] {
      auto texts = read_corpus_sentences_file(config.corpus.path,
                                              config.corpus.min_chars);
      if (config.corpus.max_sentences > 0 &&
          texts.size() > config.corpus.max_sentences) {
        texts.resize(config.corpus.max_sentences);
      }
      if (texts.empty()) throw ConfigError("corpus has no sentences");
      return texts;
    });
  }

  std::shared_ptr<const IdLists> task_ids(const Lexicon& lex,
                                          const TaskConfig& t) {
    return id_lists.get(lex.key + "|task|" + t.name, [&] {
      auto data = task(t);
      IdLists out;
      for (const std::string& text : data->texts) out.push_back(ids_of(lex, text));
      return out;
    });
  }

  std::shared_ptr<const IdLists> corpus_ids(const Lexicon& lex) {
    return id_lists.get(lex.key + "|corpus", [&] {
      auto texts = corpus();
      IdLists out;
      for (const std::string& text : *texts) out.push_back(ids_of(lex, text));
      return out;
    });
  }

  std::shared_ptr<const TokenStats> corpus_stats(const Lexicon& lex) {
    return stats.get(lex.key, [&] {
      auto ids = corpus_ids(lex);
      return compute_stats(*ids, lex.vocab->size(), config.corpus.path);
    });
  }

  std::shared_ptr<const TokenClassFlags> bias_flags(const Lexicon& lex) {
    return flags.get(lex.key, [&] {
      if (!config.stoplist.empty()) {
        return classify_tokens_with_stoplist(*lex.vocab,
                                             read_stoplist_file(config.stoplist));
      }
      if (config.corpus.path.empty()) {
        throw ConfigError("bias filtering needs a stoplist or corpus.path");
      }
      return classify_tokens(*lex.vocab, *corpus_stats(lex),
                             config.frequent_tokens);
    });
  }

  std::shared_ptr<const EmbeddingTensor> dump(const std::string& path) {
    return dumps.get(path, [&] { return read_dump_file(path); });
  }

  std::shared_ptr<const StaticTable> table(const ModelConfig& m,
                                           const std::vector<int>& layers) {
    std::string key = m.name + "|" + format_layers(layers);
    return tables.get(key, [&] {
      StaticTable t;
      if (m.kind == ModelKind::kWord2Vec) {
        t = load_static_table(m.table, TableFormat::kWord2VecText);
      } else if (!m.table.empty()) {
        t = load_static_table(m.table, TableFormat::kStt1);
      } else {
        std::ifstream in(m.source_dump, std::ios::binary);
        if (!in) throw IoError("cannot open dump '" + m.source_dump + "'", 0);
        DumpReader reader(in);
        AvgTableBuilder builder(reader.dim(), layers);
        while (auto rec = reader.next()) builder.add(*rec, reader.layers());
        t = builder.finish(m.source_dump);
      }
      if (m.filter_top > 0) t = filter_top_frequent(t, m.filter_top);
      return t;
    });
  }
};

namespace {

struct CellContext {
  Experiment::Resources* res = nullptr;
  const ExperimentConfig* config = nullptr;
  const CellSpec* cell = nullptr;
  const TaskConfig* task = nullptr;
  AggregationSpec spec;
  bool need_corpus = false;
  int workers = 1;
  Warnings* warnings = nullptr;
};

// Sentence vectors for the task and, when needed, the corpus.
struct Vectors {
  Matrix target;
  std::optional<Matrix> corpus;
};

Matrix aggregate_side(const CellContext& ctx, const Lexicon& lex,
                      const EmbeddingTensor& tensor, const AggregationSpec& spec,
                      const TokenStats* target_stats, bool is_corpus) {
  std::shared_ptr<const TokenStats> stats;
  const TokenStats* use = nullptr;
  if (spec.weighting == Weighting::kIdf) {
    if (spec.stats_source == StatsSource::kCorpus) {
      stats = ctx.res->corpus_stats(lex);
      use = stats.get();
    } else {
      use = target_stats;
    }
  }
  std::shared_ptr<const TokenClassFlags> flags;
  TokenClassFlags plain({}, lex.vocab->specials());
  const TokenClassFlags* use_flags = &plain;
  if (spec.bias_filter) {
    flags = ctx.res->bias_flags(lex);
    use_flags = flags.get();
  }
  Warnings local;
  Matrix out = aggregate(tensor, spec, use, *use_flags, &local, ctx.workers);
  for (std::string& m : local.messages) {
    warn(ctx.warnings, (is_corpus ? "corpus: " : "") + std::move(m));
  }
  return out;
}

Vectors embed_static(const CellContext& ctx, const Lexicon& lex,
                     const std::function<EmbeddingTensor(const IdLists&,
                                                         const std::vector<std::string>&)>& embed,
                     const IdLists& target_ids,
                     const std::vector<std::string>& target_texts) {
  AggregationSpec spec = ctx.spec;
  spec.layers = {kStaticLayer};
  TokenStats target_stats;
  if (spec.weighting == Weighting::kIdf &&
      spec.stats_source == StatsSource::kTarget) {
    target_stats = compute_stats(target_ids, lex.vocab->size(), ctx.task->name);
  }
  Vectors v;
  v.target = aggregate_side(ctx, lex, embed(target_ids, target_texts), spec,
                            &target_stats, false);
  if (ctx.need_corpus) {
    auto corpus_ids = ctx.res->corpus_ids(lex);
    v.corpus = aggregate_side(ctx, lex, embed(*corpus_ids, {}), spec,
                              &target_stats, true);
  }
  return v;
}

Vectors embed_model(const CellContext& ctx, const ModelConfig& model,
                    std::uint64_t model_seed, const EmbeddingTensor* ids_from);

Vectors embed_dump(const CellContext& ctx, const ModelConfig& model) {
  auto it = model.dumps.find(ctx.task->name);
  if (it == model.dumps.end()) {
    throw ConfigError(fmt::format("model '{}' has no dump for task '{}'",
                                  model.name, ctx.task->name));
  }
  auto tensor = ctx.res->dump(it->second);
  auto data = ctx.res->task(*ctx.task);
  if (tensor->sentence_count() != data->texts.size()) {
    throw FormatError(fmt::format(
        "dump '{}' has {} sentences but task '{}' has {}", it->second,
        tensor->sentence_count(), ctx.task->name, data->texts.size()));
  }
  Lexicon lex = ctx.res->wordpiece_lexicon();
  AggregationSpec spec = ctx.spec;
  spec.layers = ctx.cell->layers;
  TokenStats target_stats;
  if (spec.weighting == Weighting::kIdf &&
      spec.stats_source == StatsSource::kTarget) {
    target_stats =
        compute_stats(tensor_ids(*tensor), lex.vocab->size(), ctx.task->name);
  }
  Vectors v;
  v.target = aggregate_side(ctx, lex, *tensor, spec, &target_stats, false);
  if (ctx.need_corpus) {
    if (model.corpus_dump.empty()) {
      throw ConfigError(fmt::format(
          "model '{}' needs a corpus_dump for corpus-fitted steps", model.name));
    }
    auto corpus = ctx.res->dump(model.corpus_dump);
    v.corpus = aggregate_side(ctx, lex, *corpus, spec, &target_stats, true);
  }
  return v;
}

Vectors embed_model(const CellContext& ctx, const ModelConfig& model,
                    std::uint64_t model_seed, const EmbeddingTensor* ids_from) {
  auto data = ctx.res->task(*ctx.task);
  switch (model.kind) {
    case ModelKind::kDump:
      return embed_dump(ctx, model);
    case ModelKind::kRandom: {
      Lexicon lex = ctx.res->wordpiece_lexicon();
      auto ids = ctx.res->task_ids(lex, *ctx.task);
      return embed_static(
          ctx, lex,
          [&](const IdLists& s, const std::vector<std::string>& texts) {
            return random_embed(s, texts, model_seed, model.dim);
          },
          *ids, data->texts);
    }
    case ModelKind::kAvg:
    case ModelKind::kWord2Vec: {
      auto table = ctx.res->table(model, model.uses_layers()
                                             ? ctx.cell->layers
                                             : std::vector<int>{kStaticLayer});
      Lexicon lex = ctx.res->wordpiece_lexicon();
      if (table->is_word_level()) {
        lex = Lexicon{"words:" + model.name, &*table->words(), true};
      }
      auto embed = [&](const IdLists& s, const std::vector<std::string>& texts) {
        return embed_with_table(s, texts, *table, ctx.warnings);
      };
      if (ids_from != nullptr) {
        IdLists ids = tensor_ids(*ids_from);
        return embed_static(ctx, lex, embed, ids, data->texts);
      }
      auto ids = ctx.res->task_ids(lex, *ctx.task);
      return embed_static(ctx, lex, embed, *ids, data->texts);
    }
    case ModelKind::kCombine: {
      if (!ctx.cell->weight) {
        throw ConfigError(fmt::format("combine model '{}' needs a weight",
                                      model.name));
      }
      const ModelConfig& contextual = ctx.config->model(model.contextual);
      const ModelConfig& averaged = ctx.config->model(model.averaged);
      Vectors a = embed_dump(ctx, contextual);
      auto tensor = ctx.res->dump(contextual.dumps.at(ctx.task->name));
      // The averaged side reads the same token ids as the contextual side.
      CellContext target_only = ctx;
      target_only.need_corpus = false;
      Vectors b = embed_model(target_only, averaged, model_seed, tensor.get());
      double w = *ctx.cell->weight;
      Vectors v;
      v.target = combine(a.target, b.target, w);
      if (ctx.need_corpus) {
        auto corpus = ctx.res->dump(contextual.corpus_dump);
        Lexicon lex = ctx.res->wordpiece_lexicon();
        auto table = ctx.res->table(
            averaged, averaged.uses_layers() ? ctx.cell->layers
                                             : std::vector<int>{kStaticLayer});
        AggregationSpec spec = ctx.spec;
        spec.layers = {kStaticLayer};
        TokenStats target_stats;
        if (spec.weighting == Weighting::kIdf &&
            spec.stats_source == StatsSource::kTarget) {
          target_stats =
              compute_stats(tensor_ids(*tensor), lex.vocab->size(), ctx.task->name);
        }
        IdLists ids = tensor_ids(*corpus);
        Matrix static_corpus = aggregate_side(
            ctx, lex, embed_with_table(ids, {}, *table, ctx.warnings), spec,
            &target_stats, true);
        v.corpus = combine(*a.corpus, static_corpus, w);
      }
      return v;
    }
  }
  throw ConfigError("unknown model kind");
}

EvalReport score(const CellContext& ctx, const TaskData& data,
                 const Matrix& vectors) {
  const TaskConfig& t = *ctx.task;
  SoftmaxOptions options;
  options.l2 = ctx.config->l2;
  switch (t.kind) {
    case TaskKind::kSts:
      return eval_sts(*data.pairs, vectors, t.name);
    case TaskKind::kCluster:
      return eval_clustering(data.labeled->labels, vectors, t.runs,
                             ctx.cell->seed, ctx.workers, t.name);
    case TaskKind::kClassify:
      return eval_classification(*data.labeled, vectors, t.folds,
                                 ctx.cell->seed, options, ctx.workers, t.name);
    case TaskKind::kClassifyPairs:
      return eval_pair_classification(*data.pairs, vectors, t.folds,
                                      ctx.cell->seed, options, ctx.workers,
                                      t.name);
    case TaskKind::kIsoScore: {
      EvalReport r;
      r.task = t.name;
      r.metric = MetricKind::kIsoScore;
      r.value = iso_score(vectors);
      return r;
    }
    case TaskKind::kAlignment: {
      auto [a, b] = positive_pairs(*data.pairs, vectors);
      EvalReport r;
      r.task = t.name;
      r.metric = MetricKind::kAlignment;
      r.value = alignment(a, b, t.normalize);
      return r;
    }
    case TaskKind::kUniformity: {
      EvalReport r;
      r.task = t.name;
      r.metric = MetricKind::kUniformity;
      r.value = uniformity(vectors, t.normalize);
      return r;
    }
  }
  throw ConfigError("unknown task kind");
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

}  // namespace

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)),
      resources_(std::make_unique<Resources>(config_)) {
  config_.validate();
}

Experiment::~Experiment() = default;

namespace {

CellResult run_cell_impl(const ExperimentConfig& config,
                         Experiment::Resources& res, const CellSpec& cell,
                         int workers) {
  CellResult result;
  result.cell = cell;
  try {
    const TaskConfig& task = config.task(cell.task);
    result.metric = task_metric(task.kind);
    const ModelConfig& model = config.model(cell.model);
    std::vector<TransformStep> chain = parse_post_chain(cell.post);

    Warnings warnings;
    CellContext ctx;
    ctx.res = &res;
    ctx.config = &config;
    ctx.cell = &cell;
    ctx.task = &task;
    ctx.spec = parse_aggregation(cell.aggregation);
    ctx.need_corpus = std::any_of(chain.begin(), chain.end(), [](const auto& s) {
      return s.source == FitSource::kCorpus;
    });
    ctx.workers = workers;
    ctx.warnings = &warnings;
    if (model.uses_weight() != cell.weight.has_value()) {
      throw ConfigError(fmt::format(
          "model '{}' {} a combine weight", model.name,
          model.uses_weight() ? "needs" : "does not take"));
    }

    auto data = res.task(task);
    std::vector<std::uint64_t> model_seeds = model.kind == ModelKind::kRandom
                                                 ? model.seeds
                                                 : std::vector<std::uint64_t>{0};
    std::vector<EvalReport> reports;
    for (std::uint64_t s : model_seeds) {
      Vectors v = embed_model(ctx, model, s, nullptr);
      Matrix processed = run_post_chain(
          chain, v.target, v.corpus ? &*v.corpus : nullptr, &warnings);
      reports.push_back(score(ctx, *data, processed));
    }

    EvalReport out = reports.front();
    if (reports.size() > 1) {
      double mean = 0.0;
      for (const EvalReport& r : reports) mean += r.value;
      mean /= static_cast<double>(reports.size());
      double var = 0.0;
      for (const EvalReport& r : reports) var += (r.value - mean) * (r.value - mean);
      out.value = mean;
      out.stddev = std::sqrt(var / static_cast<double>(reports.size()));
      out.runs = static_cast<int>(reports.size());
      out.seeds = model_seeds;
    }
    out.provenance = cell.provenance() + ";kind=" +
                     std::string(model_kind_name(model.kind));
    if (model.kind == ModelKind::kRandom) {
      out.provenance += ";model_seeds=" + join_seeds(model_seeds);
    }
    for (auto& m : warnings.messages) out.warnings.push_back(std::move(m));
    out.validate();
    result.report = std::move(out);
  } catch (const std::exception& e) {
    result.report.reset();
    result.error = e.what();
    if (result.error.empty()) result.error = "unknown failure";
  }
  return result;
}

}  // namespace

CellResult Experiment::run_cell(const CellSpec& cell) const {
  int workers = config_.workers > 0 ? config_.workers : default_worker_count();
  return run_cell_impl(config_, *resources_, cell, workers);
}

std::vector<CellResult> Experiment::run(int workers) const {
  if (workers <= 0) {
    workers = config_.workers > 0 ? config_.workers : default_worker_count();
  }
  std::vector<CellSpec> cells = expand_grid(config_);
  std::vector<CellResult> results(cells.size());
  // Parallel over cells when there are enough of them, else inside cells.
  bool outer = cells.size() >= static_cast<std::size_t>(workers);
  parallel_for(cells.size(), outer ? workers : 1, [&](std::size_t i) {
    results[i] = run_cell_impl(config_, *resources_, cells[i], outer ? 1 : workers);
  });
  return results;
}

}  // namespace embshape
